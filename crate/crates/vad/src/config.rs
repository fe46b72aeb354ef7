//! TOML run configuration.
//!
//! Every section is optional and falls back to the library defaults.
//! Command-line flags are applied on top of the parsed file. The whole
//! struct is echoed into every artifact, so it holds no file paths or
//! thread counts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vad_core::ensemble::{EnsembleConfig, HyperparamChoice};
use vad_core::nn::MlpConfig;
use vad_core::synth::SynthSpec;
use vad_core::{FrameSpec, GateConfig, GridSpec, MfccConfig, SvmHyperparams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub frame: FrameSection,
    pub mfcc: MfccSection,
    pub gate: GateSection,
    pub svm: SvmSection,
    pub grid: GridSection,
    pub ensemble: EnsembleSection,
    pub mlp: MlpSection,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            frame: FrameSection::default(),
            mfcc: MfccSection::default(),
            gate: GateSection::default(),
            svm: SvmSection::default(),
            grid: GridSection::default(),
            ensemble: EnsembleSection::default(),
            mlp: MlpSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub frame_ms: u32,
    pub overlap_ms: u32,
}

impl Default for FrameSection {
    fn default() -> Self {
        let spec = FrameSpec::default();
        Self {
            frame_ms: spec.frame_ms,
            overlap_ms: spec.overlap_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccSection {
    pub n_filters: usize,
    pub fft_size: Option<usize>,
    pub preemphasis: f64,
    pub mel_low_hz: f64,
    pub mel_high_hz: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccSection {
    fn default() -> Self {
        let cfg = MfccConfig::default();
        Self {
            n_filters: cfg.n_filters,
            fft_size: cfg.fft_size,
            preemphasis: cfg.preemphasis,
            mel_low_hz: cfg.mel_low_hz,
            mel_high_hz: cfg.mel_high_hz,
            log_floor: cfg.log_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSection {
    /// Fixed log-mel energy threshold; when unset, extraction derives one.
    pub threshold: Option<f64>,
    /// Percentile of speech-frame energies used for the derived threshold.
    pub percentile: f64,
}

impl Default for GateSection {
    fn default() -> Self {
        Self {
            threshold: None,
            percentile: vad_core::features::DEFAULT_GATE_PERCENTILE,
        }
    }
}

/// How a layer picks `(C, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Search {
    /// Grid search (for ensemble members: once, shared by all members).
    Grid,
    /// A separate grid search for every member.
    PerMember,
    /// Use the configured `c` and `gamma`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub search: Search,
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cache_rows: usize,
}

impl Default for SvmSection {
    fn default() -> Self {
        let hp = SvmHyperparams::default();
        Self {
            search: Search::Grid,
            c: hp.c,
            gamma: hp.gamma,
            tol: hp.tol,
            max_iter: hp.max_iter,
            cache_rows: hp.cache_rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            c_values: g.c_values,
            gamma_values: g.gamma_values,
            folds: g.folds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_members: usize,
    pub member_search: Search,
    pub meta_search: Search,
    /// Output-layer hyperparameters when `meta_search = "fixed"`.
    pub meta_c: f64,
    pub meta_gamma: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            n_members: EnsembleConfig::default().n_members,
            member_search: Search::Grid,
            meta_search: Search::Grid,
            meta_c: 1.0,
            meta_gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSection {
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_split: f64,
    pub init_range: f64,
    pub standardize: bool,
}

impl Default for MlpSection {
    fn default() -> Self {
        let c = MlpConfig::default();
        Self {
            layer_sizes: c.layer_sizes,
            learning_rate: c.learning_rate,
            beta1: c.beta1,
            beta2: c.beta2,
            epsilon: c.epsilon,
            epochs: c.epochs,
            batch_size: c.batch_size,
            validation_split: c.validation_split,
            init_range: c.init_range,
            standardize: c.standardize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub n_speech: usize,
    pub n_nonspeech: usize,
    pub clip_secs: f64,
    pub sample_rate: u32,
}

impl Default for SynthSection {
    fn default() -> Self {
        let s = SynthSpec::default();
        Self {
            n_speech: s.n_speech,
            n_nonspeech: s.n_nonspeech,
            clip_secs: s.clip_secs,
            sample_rate: s.sample_rate,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(origin, e))
    }

    /// Reads `path`, or returns the defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_toml(&text, p)
            }
        }
    }

    pub fn frame_spec(&self) -> Result<FrameSpec> {
        FrameSpec::new(self.frame.frame_ms, self.frame.overlap_ms).map_err(|e| Error::Usage(format!("[frame]: {e}")))
    }

    pub fn mfcc_config(&self) -> MfccConfig {
        MfccConfig {
            n_filters: self.mfcc.n_filters,
            fft_size: self.mfcc.fft_size,
            preemphasis: self.mfcc.preemphasis,
            mel_low_hz: self.mfcc.mel_low_hz,
            mel_high_hz: self.mfcc.mel_high_hz,
            log_floor: self.mfcc.log_floor,
            ..MfccConfig::default()
        }
    }

    pub fn fixed_gate(&self) -> Option<GateConfig> {
        self.gate.threshold.map(|t| GateConfig { energy_threshold: t })
    }

    /// Solver settings with the configured fixed `(C, gamma)`.
    pub fn svm_hyperparams(&self) -> SvmHyperparams {
        SvmHyperparams {
            c: self.svm.c,
            gamma: self.svm.gamma,
            tol: self.svm.tol,
            max_iter: self.svm.max_iter,
            cache_rows: self.svm.cache_rows,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            c_values: self.grid.c_values.clone(),
            gamma_values: self.grid.gamma_values.clone(),
            folds: self.grid.folds,
        }
    }

    pub fn ensemble_config(&self) -> EnsembleConfig {
        let base = self.svm_hyperparams();
        let member_hp = match self.ensemble.member_search {
            Search::Grid => HyperparamChoice::Grid(self.grid_spec()),
            Search::PerMember => HyperparamChoice::PerMemberGrid(self.grid_spec()),
            Search::Fixed => HyperparamChoice::Fixed(base),
        };
        let meta_hp = match self.ensemble.meta_search {
            Search::Grid | Search::PerMember => HyperparamChoice::Grid(self.grid_spec()),
            Search::Fixed => HyperparamChoice::Fixed(SvmHyperparams {
                c: self.ensemble.meta_c,
                gamma: self.ensemble.meta_gamma,
                ..base
            }),
        };
        EnsembleConfig {
            n_members: self.ensemble.n_members,
            member_hp,
            meta_hp,
            base,
            seed: self.seed,
        }
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            layer_sizes: self.mlp.layer_sizes.clone(),
            learning_rate: self.mlp.learning_rate,
            beta1: self.mlp.beta1,
            beta2: self.mlp.beta2,
            epsilon: self.mlp.epsilon,
            epochs: self.mlp.epochs,
            batch_size: self.mlp.batch_size,
            validation_split: self.mlp.validation_split,
            init_range: self.mlp.init_range,
            standardize: self.mlp.standardize,
            seed: self.seed,
        }
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            n_speech: self.synth.n_speech,
            n_nonspeech: self.synth.n_nonspeech,
            clip_secs: self.synth.clip_secs,
            sample_rate: self.synth.sample_rate,
            seed: self.seed,
        }
    }
}
