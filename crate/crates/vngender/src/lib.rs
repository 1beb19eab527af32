//! Dataset files, model bundles, the HTTP prediction service and the
//! `vngender` command line, on top of [`vngender_core`].

pub mod bundle;
pub mod cli;
pub mod dataset;
pub mod report;
pub mod service;

pub use bundle::{load_model, save_model, ModelBundle};
pub use dataset::{load_dataset, load_embeddings, save_dataset};
pub use vngender_core;
