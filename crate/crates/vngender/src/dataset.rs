//! CSV datasets (`full_name,gender`) and `.vec` embedding files.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use vngender_core::data::{DataError, Dataset, DatasetRecord, Gender};
use vngender_core::lstm::{EmbeddingError, EmbeddingTable, ParseReport};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset has no valid rows ({rejected} rejected)")]
    Empty { rejected: usize },
    #[error("{path}: {source}")]
    Embedding { path: PathBuf, source: EmbeddingError },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

/// A data row that was skipped, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub header: bool,
    pub rejects: Vec<RowReject>,
}

/// Reads `full_name,gender` rows. A first row whose second field is not a
/// label is taken as a header. Bad rows are skipped and reported.
pub fn read_dataset<R: Read>(reader: R, source_tag: &str) -> Result<(Dataset, LoadReport), IoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut report = LoadReport::default();
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && row.len() == 2 && Gender::parse_label(&row[1]).is_err() {
            report.header = true;
            continue;
        }
        let parsed = if row.len() != 2 {
            Err(format!("expected 2 fields, found {}", row.len()))
        } else {
            Gender::parse_label(&row[1])
                .and_then(|g| DatasetRecord::new(&row[0], g))
                .map_err(|e: DataError| e.to_string())
        };
        match parsed {
            Ok(r) => records.push(r),
            Err(reason) => report.rejects.push(RowReject { line, reason }),
        }
    }
    if records.is_empty() {
        return Err(IoError::Empty { rejected: report.rejects.len() });
    }
    Ok((Dataset::new(records, source_tag), report))
}

pub fn load_dataset(path: &Path) -> Result<(Dataset, LoadReport), IoError> {
    let f = File::open(path).map_err(|e| IoError::io(path, e))?;
    let tag = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    read_dataset(io::BufReader::new(f), &tag)
}

/// Writes a header row and one row per record.
pub fn write_dataset<W: Write>(d: &Dataset, writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["full_name", "gender"])?;
    for r in &d.records {
        w.write_record([r.full_name.as_str(), if r.gender.is_male() { "1" } else { "0" }])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<(), IoError> {
    let f = File::create(path).map_err(|e| IoError::io(path, e))?;
    write_dataset(d, io::BufWriter::new(f))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Loads a text `.vec` file. Duplicate tokens keep their first vector and
/// are listed in the report.
pub fn load_embeddings(path: &Path, expected_dim: usize, oov_seed: u64) -> Result<(EmbeddingTable, ParseReport), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    EmbeddingTable::parse_vec(text.lines(), expected_dim, oov_seed)
        .map_err(|source| IoError::Embedding { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<(Dataset, LoadReport), IoError> {
        read_dataset(s.as_bytes(), "t")
    }

    #[test]
    fn rows_from_the_name_table() {
        let (d, rep) = read("Võ Minh Đù,1\nNguyễn Thị Hiền,0\n").unwrap();
        assert!(!rep.header);
        assert_eq!(d.records[0], DatasetRecord { full_name: "Võ Minh Đù".into(), gender: Gender::Male });
        assert_eq!(d.records[1].gender, Gender::Female);
    }

    #[test]
    fn header_is_detected() {
        let (d, rep) = read("full_name,gender\n  Lê Văn An ,1\n").unwrap();
        assert!(rep.header);
        assert_eq!(d.records[0].full_name, "Lê Văn An");
    }

    #[test]
    fn bad_rows_are_reported_by_line() {
        let (d, rep) = read("A B,1\nC D,2\n,0\nE,F,1\nG H,0\n").unwrap();
        assert_eq!(d.len(), 2);
        let lines: Vec<u64> = rep.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, [2, 3, 4]);
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(read(""), Err(IoError::Empty { rejected: 0 })));
        assert!(matches!(read("full_name,gender\nX,7\n"), Err(IoError::Empty { rejected: 1 })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let d = Dataset::new(
            vec![
                DatasetRecord::new("Trần, Thị \"Bé\"", Gender::Female).unwrap(),
                DatasetRecord::new("Đặng Văn Lâm", Gender::Male).unwrap(),
            ],
            "t",
        );
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let (back, rep) = read_dataset(buf.as_slice(), "t").unwrap();
        assert!(rep.header && rep.rejects.is_empty());
        assert_eq!(back.records, d.records);
    }
}
