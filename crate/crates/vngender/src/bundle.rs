//! Model bundles: everything needed to predict from a raw name.
//!
//! Layout (integers little-endian):
//!
//! ```text
//! magic     "VNGENDER-BUNDLE\n"  16 bytes
//! version   u32
//! sections  u32 count, then per section: 4-byte tag, u64 length, JSON bytes
//! checksum  SHA-256 of everything above, 32 bytes
//! ```
//!
//! LSTM bundles reference their embedding file by path and SHA-256 instead
//! of embedding it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vngender_core::eval::MacroMetrics;
use vngender_core::featurize::Vectorizer;
use vngender_core::lstm::{EmbeddingTable, LstmModel};
use vngender_core::models::{ClassifierModel, Prediction};
use vngender_core::names::{self, ComponentMask, NameComponents, NameError};
use vngender_core::pipeline::{PipelineError, TrainedModel};

use crate::dataset::{self, IoError};

pub const MAGIC: &[u8; 16] = b"VNGENDER-BUNDLE\n";
pub const FORMAT_VERSION: u32 = 1;

const TAG_META: &[u8; 4] = b"META";
const TAG_VECTORIZER: &[u8; 4] = b"VECT";
const TAG_CLASSIFIER: &[u8; 4] = b"CLSF";
const TAG_LSTM: &[u8; 4] = b"LSTM";
const TAG_EMBEDDINGS: &[u8; 4] = b"EMBD";

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("not a model bundle (bad magic)")]
    BadMagic,
    #[error("bundle format version {found} is not supported by this reader (version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("bundle is truncated")]
    Truncated,
    #[error("bundle checksum mismatch")]
    Checksum,
    #[error("bundle section {0} is missing")]
    MissingSection(&'static str),
    #[error("bundle section {section}: {source}")]
    Json { section: String, source: serde_json::Error },
    #[error("embedding file {path} changed since training (sha256 {found}, expected {expected})")]
    EmbeddingHash { path: PathBuf, expected: String, found: String },
    #[error("LSTM bundle needs the path of its embedding file")]
    NoEmbeddingSource,
}

/// Where an LSTM bundle gets its embeddings from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum EmbeddingRef {
    File { path: PathBuf, sha256: String, dim: usize, oov_seed: u64 },
    /// No pretrained vectors: every token gets its seeded random vector.
    Random { dim: usize, oov_seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub model_id: String,
    pub mask: ComponentMask,
    pub dataset_tag: String,
    pub seed: u64,
    pub created_unix: u64,
    pub metrics: Option<MacroMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub meta: BundleMeta,
    pub model: TrainedModel,
    /// Only meaningful for LSTM bundles with pretrained vectors.
    pub embedding_source: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error(transparent)]
    Name(NameError),
    #[error(transparent)]
    Model(#[from] PipelineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamePrediction {
    pub prediction: Prediction,
    pub components: NameComponents,
}

impl ModelBundle {
    pub fn new(model: TrainedModel, meta: BundleMeta, embedding_source: Option<PathBuf>) -> Self {
        Self { meta, model, embedding_source }
    }

    pub fn mask(&self) -> ComponentMask {
        self.meta.mask
    }

    /// Normalizes and segments `raw`, keeps the components of the training
    /// mask, and predicts.
    pub fn predict_name(&self, raw: &str) -> Result<NamePrediction, PredictError> {
        let components = names::parse(raw).map_err(PredictError::Name)?;
        let tokens = names::select_components(&components, self.meta.mask).map_err(PredictError::Name)?;
        let prediction = self.model.predict_tokens(&tokens)?;
        Ok(NamePrediction { prediction, components })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, BundleError> {
        let mut sections: Vec<(&[u8; 4], Vec<u8>)> = vec![(TAG_META, json(&self.meta)?)];
        match &self.model {
            TrainedModel::Classical { vectorizer, model } => {
                sections.push((TAG_VECTORIZER, json(vectorizer)?));
                sections.push((TAG_CLASSIFIER, json(model)?));
            }
            TrainedModel::Lstm { embeddings, model } => {
                let r = if embeddings.is_empty() {
                    EmbeddingRef::Random { dim: embeddings.dim(), oov_seed: embeddings.oov_seed() }
                } else {
                    let path = self.embedding_source.clone().ok_or(BundleError::NoEmbeddingSource)?;
                    let sha256 = dataset::file_sha256(&path)?;
                    EmbeddingRef::File { path, sha256, dim: embeddings.dim(), oov_seed: embeddings.oov_seed() }
                };
                sections.push((TAG_EMBEDDINGS, json(&r)?));
                sections.push((TAG_LSTM, json(model)?));
            }
        }
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
        for (tag, body) in &sections {
            out.extend_from_slice(*tag);
            out.extend_from_slice(&(body.len() as u64).to_le_bytes());
            out.extend_from_slice(body);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BundleError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(BundleError::BadMagic);
        }
        let mut cur = Cursor { bytes, pos: MAGIC.len() };
        let version = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(BundleError::Version { found: version, supported: FORMAT_VERSION });
        }
        if bytes.len() < cur.pos + 32 {
            return Err(BundleError::Truncated);
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        let count = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
        let mut sections: Vec<([u8; 4], &[u8])> = Vec::new();
        for _ in 0..count {
            let tag: [u8; 4] = cur.take(4)?.try_into().expect("4 bytes");
            let len = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes"));
            let len = usize::try_from(len).map_err(|_| BundleError::Truncated)?;
            sections.push((tag, cur.take(len)?));
        }
        if cur.pos != body.len() {
            return Err(BundleError::Truncated);
        }
        if Sha256::digest(body).as_slice() != digest {
            return Err(BundleError::Checksum);
        }
        let find = |tag: &[u8; 4], name: &'static str| {
            sections.iter().find(|(t, _)| t == tag).map(|(_, b)| *b).ok_or(BundleError::MissingSection(name))
        };
        let meta: BundleMeta = parse(find(TAG_META, "META")?, "META")?;
        let (model, embedding_source) = if let Ok(lstm) = find(TAG_LSTM, "LSTM") {
            let model: LstmModel = parse(lstm, "LSTM")?;
            let (table, source) = resolve_embeddings(parse(find(TAG_EMBEDDINGS, "EMBD")?, "EMBD")?)?;
            (TrainedModel::Lstm { embeddings: Arc::new(table), model }, source)
        } else {
            let vectorizer: Vectorizer = parse(find(TAG_VECTORIZER, "VECT")?, "VECT")?;
            let model: ClassifierModel = parse(find(TAG_CLASSIFIER, "CLSF")?, "CLSF")?;
            (TrainedModel::Classical { vectorizer, model }, None)
        };
        Ok(Self { meta, model, embedding_source })
    }
}

fn resolve_embeddings(r: EmbeddingRef) -> Result<(EmbeddingTable, Option<PathBuf>), BundleError> {
    match r {
        EmbeddingRef::Random { dim, oov_seed } => Ok((
            EmbeddingTable::new(dim, oov_seed)
                .map_err(|source| IoError::Embedding { path: PathBuf::new(), source })?,
            None,
        )),
        EmbeddingRef::File { path, sha256, dim, oov_seed } => {
            let found = dataset::file_sha256(&path)?;
            if found != sha256 {
                return Err(BundleError::EmbeddingHash { path, expected: sha256, found });
            }
            let (table, _) = dataset::load_embeddings(&path, dim, oov_seed)?;
            Ok((table, Some(path)))
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BundleError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(BundleError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, BundleError> {
    serde_json::to_vec(v).map_err(|source| BundleError::Json { section: "write".into(), source })
}

fn parse<'a, T: Deserialize<'a>>(b: &'a [u8], section: &str) -> Result<T, BundleError> {
    serde_json::from_slice(b).map_err(|source| BundleError::Json { section: section.into(), source })
}

pub fn save_model(bundle: &ModelBundle, path: &Path) -> Result<(), BundleError> {
    let bytes = bundle.to_bytes()?;
    std::fs::write(path, bytes).map_err(|e| IoError::io(path, e).into())
}

pub fn load_model(path: &Path) -> Result<ModelBundle, BundleError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    ModelBundle::from_bytes(&bytes)
}
