//! Voice activity detection with a stacked ensemble of RBF support vector
//! machines.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece
//! of the pipeline: WAV decoding from bytes, framing, MFCC extraction and the
//! log-mel energy gate, an SMO-trained soft-margin SVM with Platt
//! calibration and grid search, the two-layer SVM ensemble, a small MLP
//! baseline and the evaluation metrics. File IO, the CLI and threading live
//! in the `vad` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audio;
pub mod dataset;
pub mod ensemble;
pub mod eval;
pub mod features;
pub mod fft;
mod math;
pub mod nn;
pub mod svm;
pub mod synth;

pub use audio::{frame_clip, AudioClip, AudioError, Frame, FrameSpec};
pub use dataset::{Dataset, Label};
pub use ensemble::{EnsembleConfig, EnsembleError, EnsembleModel, HyperparamChoice};
pub use eval::{EvalError, EvalReport};
pub use features::{FeatureVector, GateConfig, LabeledDataset, MfccConfig, N_MFCC};
pub use nn::{MlpConfig, MlpModel};
pub use svm::{GridSpec, Scaler, SvmError, SvmHyperparams, SvmModel};

use rand::SeedableRng;

/// Seeded generator used everywhere randomness is needed.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
