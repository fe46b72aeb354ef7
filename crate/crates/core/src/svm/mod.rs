//! Soft-margin RBF support vector machine.
//!
//! Training solves the standard dual
//!
//! ```text
//! max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! with sequential minimal optimization (maximal violating pair working set,
//! LRU kernel row cache). Inputs are standardized per model and decision
//! values are mapped to probabilities with a Platt sigmoid.

mod grid;
mod kernel;
mod model;
mod platt;
mod scaler;
mod smo;

pub use grid::{cv_accuracy, grid_search, select_best, stratified_folds, GridCell, GridResult, GridSpec};
pub use kernel::{rbf_kernel, squared_distance, KernelCache};
pub use model::{train_svm, SvmModel};
pub use platt::{fit_platt, platt_nll, platt_probability, platt_targets};
pub use scaler::Scaler;
pub use smo::{dual_objective, SmoSolution, SmoSolver};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("too few rows per class for {folds}-fold cross-validation")]
    FoldTooSmall { folds: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(&'static str),
    #[error("SMO did not meet the KKT tolerance within {} iterations", .0.iterations)]
    IterationLimit(alloc::boxed::Box<SvmModel>),
}

impl SvmError {
    /// The model carried by an iteration-limit error, if any.
    pub fn into_unconverged_model(self) -> Option<SvmModel> {
        match self {
            SvmError::IterationLimit(model) => Some(*model),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmHyperparams {
    pub c: f64,
    pub gamma: f64,
    /// KKT tolerance, the maximal violation allowed at termination.
    pub tol: f64,
    pub max_iter: usize,
    /// Kernel rows kept in the LRU cache.
    pub cache_rows: usize,
}

impl Default for SvmHyperparams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: 1.0 / crate::features::N_MFCC as f64,
            tol: 1e-3,
            max_iter: 10_000_000,
            cache_rows: 512,
        }
    }
}

impl SvmHyperparams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self {
            c,
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvmError::InvalidHyperparams("C must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(SvmError::InvalidHyperparams("gamma must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(SvmError::InvalidHyperparams("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(SvmError::InvalidHyperparams("max_iter must be positive"));
        }
        Ok(())
    }
}
