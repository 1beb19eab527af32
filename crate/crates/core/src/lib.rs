//! Gender prediction from Vietnamese full names.
//!
//! The crate is `no_std` (with `alloc`) so the pure pipeline can be embedded
//! anywhere; file formats, persistence and the HTTP service live in the
//! `vngender` companion crate.
//!
//! Pipeline: [`names`] normalizes and segments a name into family / middle /
//! given components, [`featurize`] turns the selected components into sparse
//! count or TF-IDF vectors, [`models`] and [`lstm`] train classifiers, and
//! [`eval`] runs stratified experiments and component ablations.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod data;
pub mod eval;
pub mod featurize;
pub mod lstm;
pub mod math;
pub mod models;
pub mod names;
pub mod pipeline;
pub mod rng;

pub use data::{Dataset, DatasetRecord, DatasetStats, Gender};
pub use eval::{AblationReport, ConfusionMatrix, MacroMetrics, SplitSpec};
pub use featurize::{SparseVector, Vectorizer, VectorizerConfig, VectorizerMode, Vocabulary};
pub use lstm::{EmbeddingTable, LstmParams, LstmTrainConfig};
pub use models::{ClassifierKind, ClassifierModel, LabeledMatrix, Prediction};
pub use names::{ComponentMask, NameComponents};
pub use pipeline::{ModelSpec, TrainedModel};
