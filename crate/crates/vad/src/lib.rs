//! File formats, parallel drivers and the command line for `vad_core`.
//!
//! Formats: WAV audio, `path,label` CSV manifests, binary `VADF` feature
//! files, JSON models and reports, and CSV for ROC curves, sweeps and grid
//! search results.

pub mod cli;
pub mod config;
pub mod error;
pub mod featfile;
pub mod manifest;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod wav;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use featfile::{FeatureFile, FeatureMeta};
pub use model_io::{Model, ModelFile};
