use std::path::{Path, PathBuf};

use vad_core::audio::AudioError;
use vad_core::ensemble::EnsembleError;
use vad_core::features::FeatureError;
use vad_core::nn::MlpError;
use vad_core::{EvalError, SvmError};

use crate::featfile::FeatFileError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Audio { path: PathBuf, source: AudioError },
    #[error("{path}: {source}")]
    FeatureFile { path: PathBuf, source: FeatFileError },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for bad or missing input data.
pub const EXIT_DATA: i32 = 2;
/// Exit status when SMO hits its iteration cap.
pub const EXIT_NUMERIC: i32 = 3;

fn is_iteration_limit(e: &SvmError) -> bool {
    matches!(e, SvmError::IterationLimit(_))
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<Path>, msg: impl ToString) -> Self {
        Self::Parse {
            path: path.as_ref().to_path_buf(),
            msg: msg.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => EXIT_USAGE,
            Error::Svm(e) if is_iteration_limit(e) => EXIT_NUMERIC,
            Error::Ensemble(EnsembleError::Member { source, .. }) if is_iteration_limit(source) => EXIT_NUMERIC,
            Error::Ensemble(EnsembleError::Meta(e) | EnsembleError::Svm(e)) if is_iteration_limit(e) => EXIT_NUMERIC,
            _ => EXIT_DATA,
        }
    }
}
