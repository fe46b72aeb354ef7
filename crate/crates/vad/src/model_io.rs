//! JSON model files.
//!
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so a save/load cycle reproduces every parameter bit for bit.
//! Every file carries a `kind` tag (`svm`, `ensemble` or `nn`), the seed, the
//! gate threshold used in training and the run config.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vad_core::ensemble::EnsembleModel;
use vad_core::nn::MlpModel;
use vad_core::{Scaler, SvmHyperparams, SvmModel};

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerJson {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// One SVM. Stand-alone files fill the optional header fields; ensemble
/// members leave them out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub version: u32,
    pub gamma: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub bias: f64,
    pub platt_a: f64,
    pub platt_b: f64,
    pub scaler: ScalerJson,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coeffs: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
}

impl SvmJson {
    pub fn from_model(m: &SvmModel) -> Self {
        Self {
            kind: None,
            version: MODEL_VERSION,
            gamma: m.hyperparams.gamma,
            c: m.hyperparams.c,
            bias: m.bias,
            platt_a: m.platt_a,
            platt_b: m.platt_b,
            scaler: ScalerJson {
                means: m.scaler.means.clone(),
                stds: m.scaler.stds.clone(),
            },
            support_vectors: m.support_vectors.clone(),
            dual_coeffs: m.dual_coeffs.clone(),
            tol: m.hyperparams.tol,
            max_iter: m.hyperparams.max_iter,
            iterations: m.iterations,
            seed: None,
            gate_threshold: None,
            config: None,
        }
    }

    pub fn to_model(&self) -> Result<SvmModel, String> {
        let dim = self.scaler.means.len();
        if self.scaler.stds.len() != dim {
            return Err("scaler means and stds differ in length".into());
        }
        if self.support_vectors.len() != self.dual_coeffs.len() {
            return Err("support_vectors and dual_coeffs differ in length".into());
        }
        if self.support_vectors.iter().any(|sv| sv.len() != dim) {
            return Err("support vector dimension does not match the scaler".into());
        }
        Ok(SvmModel {
            support_vectors: self.support_vectors.clone(),
            dual_coeffs: self.dual_coeffs.clone(),
            bias: self.bias,
            hyperparams: SvmHyperparams {
                c: self.c,
                gamma: self.gamma,
                tol: self.tol,
                max_iter: self.max_iter,
                ..SvmHyperparams::default()
            },
            platt_a: self.platt_a,
            platt_b: self.platt_b,
            scaler: Scaler {
                means: self.scaler.means.clone(),
                stds: self.scaler.stds.clone(),
            },
            support_indices: Vec::new(),
            iterations: self.iterations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub kind: String,
    pub version: u32,
    pub n_members: usize,
    pub seed: u64,
    pub layers: usize,
    pub members: Vec<SvmJson>,
    pub meta: SvmJson,
    pub gate_threshold: Option<f64>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpJson {
    pub kind: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub scaler: Option<ScalerJson>,
    pub seed: u64,
    pub gate_threshold: Option<f64>,
    pub config: RunConfig,
}

/// A loaded model of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Svm(SvmModel),
    Ensemble(EnsembleModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Svm(_) => "svm",
            Model::Ensemble(_) => "ensemble",
            Model::Mlp(_) => "nn",
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Model::Svm(m) => m.dim(),
            Model::Ensemble(m) => m.dim(),
            Model::Mlp(m) => m.input_dim(),
        }
    }

    /// Speech probability of one feature row.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Model::Svm(m) => m.predict_prob(x)?,
            Model::Ensemble(m) => m.predict(x)?.0,
            Model::Mlp(m) => m.forward(x)?,
        })
    }
}

/// A model with the provenance stored next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub seed: u64,
    pub gate_threshold: Option<f64>,
    pub config: RunConfig,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let text = match &self.model {
            Model::Svm(m) => {
                let mut j = SvmJson::from_model(m);
                j.kind = Some("svm".into());
                j.seed = Some(self.seed);
                j.gate_threshold = self.gate_threshold;
                j.config = Some(self.config.clone());
                serde_json::to_string_pretty(&j)
            }
            Model::Ensemble(m) => serde_json::to_string_pretty(&EnsembleJson {
                kind: "ensemble".into(),
                version: MODEL_VERSION,
                n_members: m.n_members(),
                seed: m.seed,
                layers: m.layers,
                members: m.members.iter().map(SvmJson::from_model).collect(),
                meta: SvmJson::from_model(&m.meta),
                gate_threshold: self.gate_threshold,
                config: self.config.clone(),
            }),
            Model::Mlp(m) => serde_json::to_string_pretty(&MlpJson {
                kind: "nn".into(),
                version: MODEL_VERSION,
                layer_sizes: m.config.layer_sizes.clone(),
                weights: m.weights.clone(),
                biases: m.biases.clone(),
                scaler: m.scaler.as_ref().map(|s| ScalerJson {
                    means: s.means.clone(),
                    stds: s.stds.clone(),
                }),
                seed: self.seed,
                gate_threshold: self.gate_threshold,
                config: self.config.clone(),
            }),
        };
        let mut text = text.expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        struct Tag {
            kind: Option<String>,
            version: u32,
        }
        let tag: Tag = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if tag.version != MODEL_VERSION {
            return Err(format!("unsupported model version {}", tag.version));
        }
        match tag.kind.as_deref() {
            Some("svm") | None => {
                let j: SvmJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
                Ok(Self {
                    model: Model::Svm(j.to_model()?),
                    seed: j.seed.unwrap_or(0),
                    gate_threshold: j.gate_threshold,
                    config: j.config.unwrap_or_default(),
                })
            }
            Some("ensemble") => {
                let j: EnsembleJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
                if j.members.len() != j.n_members || j.n_members == 0 {
                    return Err("n_members does not match the member list".into());
                }
                let members = j.members.iter().map(SvmJson::to_model).collect::<Result<Vec<_>, _>>()?;
                let meta = j.meta.to_model()?;
                if meta.dim() != members.len() {
                    return Err("output layer dimension does not match the member count".into());
                }
                Ok(Self {
                    model: Model::Ensemble(EnsembleModel {
                        members,
                        meta,
                        seed: j.seed,
                        layers: j.layers,
                    }),
                    seed: j.seed,
                    gate_threshold: j.gate_threshold,
                    config: j.config,
                })
            }
            Some("nn") => {
                let j: MlpJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
                let mut config = j.config.mlp_config();
                config.layer_sizes = j.layer_sizes.clone();
                config.seed = j.seed;
                let mut model = MlpModel::init(&config).map_err(|e| e.to_string())?;
                let shapes_match = model.weights.len() == j.weights.len()
                    && model.weights.iter().zip(&j.weights).all(|(a, b)| {
                        a.len() == b.len() && a.iter().zip(b).all(|(ra, rb)| ra.len() == rb.len())
                    })
                    && model.biases.iter().zip(&j.biases).all(|(a, b)| a.len() == b.len());
                if !shapes_match {
                    return Err("weight shapes do not match layer_sizes".into());
                }
                if j.scaler.as_ref().is_some_and(|s| s.means.len() != model.input_dim() || s.stds.len() != model.input_dim()) {
                    return Err("scaler dimension does not match the input layer".into());
                }
                model.weights = j.weights;
                model.biases = j.biases;
                model.scaler = j.scaler.map(|s| Scaler {
                    means: s.means,
                    stds: s.stds,
                });
                model.config.standardize = model.scaler.is_some();
                Ok(Self {
                    model: Model::Mlp(model),
                    seed: j.seed,
                    gate_threshold: j.gate_threshold,
                    config: j.config,
                })
            }
            Some(other) => Err(format!("unknown model kind {other:?}")),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|msg| Error::parse(path, msg))
    }
}
