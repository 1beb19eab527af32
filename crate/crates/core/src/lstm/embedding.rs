//! Token embedding table with deterministic out-of-vocabulary vectors.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng;

/// Half-width of the uniform range OOV vectors are drawn from.
pub const OOV_RANGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("line {line}: malformed header, expected `<count> <dim>`")]
    BadHeader { line: usize },
    #[error("line {line}: header dimension {found} does not match expected {expected}")]
    HeaderDim { line: usize, expected: usize, found: usize },
    #[error("line {line}: expected {expected} components, found {found}")]
    RowDim { line: usize, expected: usize, found: usize },
    #[error("line {line}: component `{value}` is not a number")]
    NotNumeric { line: usize, value: String },
    #[error("vector for `{token}` has length {found}, table dimension is {expected}")]
    WrongLength { token: String, expected: usize, found: usize },
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    oov_seed: u64,
    #[serde(skip)]
    oov_cache: BTreeMap<String, Vec<f64>>,
}

/// Non-fatal findings while parsing a vector file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParseReport {
    /// `(line, token)` of repeated tokens; the first occurrence is kept.
    pub duplicates: Vec<(usize, String)>,
    pub declared_count: usize,
}

impl EmbeddingTable {
    pub fn new(dim: usize, oov_seed: u64) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(Self { dim, vectors: BTreeMap::new(), oov_seed, oov_cache: BTreeMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn oov_seed(&self) -> u64 {
        self.oov_seed
    }

    /// Number of pretrained vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    /// Adds a vector; returns `false` (keeping the old one) if the token is
    /// already present.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<bool, EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::WrongLength {
                token: token.to_string(),
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.vectors.contains_key(token) {
            return Ok(false);
        }
        self.vectors.insert(token.to_string(), vector);
        Ok(true)
    }

    /// The vector for `token`. Unknown tokens get a uniform draw from
    /// `[-OOV_RANGE, OOV_RANGE]` seeded by the table seed and the token, so
    /// repeated lookups agree without mutating the table.
    pub fn vector(&self, token: &str) -> Cow<'_, [f64]> {
        if let Some(v) = self.vectors.get(token).or_else(|| self.oov_cache.get(token)) {
            return Cow::Borrowed(v);
        }
        Cow::Owned(self.draw_oov(token))
    }

    /// Like [`vector`](Self::vector) but caches OOV draws in the table.
    pub fn lookup(&mut self, token: &str) -> &[f64] {
        if !self.vectors.contains_key(token) && !self.oov_cache.contains_key(token) {
            let v = self.draw_oov(token);
            self.oov_cache.insert(token.to_string(), v);
        }
        self.vectors.get(token).or_else(|| self.oov_cache.get(token)).expect("inserted above")
    }

    fn draw_oov(&self, token: &str) -> Vec<f64> {
        let mut r = rng::seeded(rng::derive(self.oov_seed, rng::hash_str(token)));
        (0..self.dim).map(|_| r.random_range(-OOV_RANGE..=OOV_RANGE)).collect()
    }

    /// Parses the text vector format: a `<count> <dim>` header, then one
    /// `token v1 … v_dim` line per token.
    pub fn parse_vec<'a, I>(lines: I, expected_dim: usize, oov_seed: u64) -> Result<(Self, ParseReport), EmbeddingError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut lines = lines.into_iter().enumerate().map(|(i, l)| (i + 1, l));
        let (hline, header) = lines.next().ok_or(EmbeddingError::BadHeader { line: 1 })?;
        let mut parts = header.split_whitespace();
        let (Some(count), Some(dim), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(EmbeddingError::BadHeader { line: hline });
        };
        let (Ok(count), Ok(dim)) = (count.parse::<usize>(), dim.parse::<usize>()) else {
            return Err(EmbeddingError::BadHeader { line: hline });
        };
        if dim != expected_dim {
            return Err(EmbeddingError::HeaderDim { line: hline, expected: expected_dim, found: dim });
        }
        let mut table = Self::new(dim, oov_seed)?;
        let mut report = ParseReport { declared_count: count, ..ParseReport::default() };
        for (line, text) in lines {
            let mut fields = text.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let mut v = Vec::with_capacity(dim);
            for f in fields {
                let x: f64 = f
                    .parse()
                    .map_err(|_| EmbeddingError::NotNumeric { line, value: f.to_string() })?;
                v.push(x);
            }
            if v.len() != dim {
                return Err(EmbeddingError::RowDim { line, expected: dim, found: v.len() });
            }
            if !table.insert(token, v)? {
                report.duplicates.push((line, token.to_string()));
            }
        }
        Ok((table, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_small_file() {
        let (t, report) = EmbeddingTable::parse_vec("2 3\na 1 0 0\nb 0 1 0".lines(), 3, 0).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(&*t.vector("b"), &[0.0, 1.0, 0.0]);
        assert!(report.duplicates.is_empty());
    }

    #[test]
    fn trailing_spaces_are_fine() {
        let (t, _) = EmbeddingTable::parse_vec("1 2 \nx 0.25 -1.5 \n".lines(), 2, 0).unwrap();
        assert_eq!(&*t.vector("x"), &[0.25, -1.5]);
    }

    #[test]
    fn short_row_names_its_line() {
        let mut text = alloc::string::String::from("2 300\n");
        text.push_str("a");
        for _ in 0..300 {
            text.push_str(" 0.1");
        }
        text.push_str("\nb");
        for _ in 0..299 {
            text.push_str(" 0.1");
        }
        let err = EmbeddingTable::parse_vec(text.lines(), 300, 0).unwrap_err();
        assert_eq!(err, EmbeddingError::RowDim { line: 3, expected: 300, found: 299 });
    }

    #[test]
    fn header_and_value_errors() {
        assert_eq!(
            EmbeddingTable::parse_vec("2 4\n".lines(), 3, 0).unwrap_err(),
            EmbeddingError::HeaderDim { line: 1, expected: 3, found: 4 }
        );
        assert_eq!(EmbeddingTable::parse_vec("hello".lines(), 3, 0).unwrap_err(), EmbeddingError::BadHeader { line: 1 });
        assert!(matches!(
            EmbeddingTable::parse_vec("1 2\na 1 x".lines(), 2, 0).unwrap_err(),
            EmbeddingError::NotNumeric { line: 2, .. }
        ));
    }

    #[test]
    fn duplicates_keep_first() {
        let (t, report) = EmbeddingTable::parse_vec("2 1\na 1\na 2".lines(), 1, 0).unwrap();
        assert_eq!(&*t.vector("a"), &[1.0]);
        assert_eq!(report.duplicates, vec![(3, "a".into())]);
    }

    #[test]
    fn oov_draws_are_stable_and_bounded() {
        let mut t = EmbeddingTable::new(8, 42).unwrap();
        let first = t.vector("zzz").into_owned();
        assert_eq!(t.lookup("zzz"), first.as_slice());
        assert_eq!(t.lookup("zzz"), first.as_slice());
        assert_eq!(&*t.vector("zzz"), first.as_slice());
        assert!(first.iter().all(|x| x.abs() <= OOV_RANGE));
        assert_ne!(&*t.vector("zzy"), first.as_slice());
        assert_eq!(t.len(), 0);
        let other_seed = EmbeddingTable::new(8, 43).unwrap();
        assert_ne!(&*other_seed.vector("zzz"), first.as_slice());
    }
}
