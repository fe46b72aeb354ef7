//! Fully connected baseline: ReLU hidden layers, sigmoid output, binary
//! cross-entropy, Adam with bias correction.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::dataset::{Dataset, Label};
use crate::math;
use crate::svm::Scaler;

/// Outputs are kept this far from 0 and 1.
const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid MLP config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Input, hidden..., output. The output layer must have one unit.
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_split: f64,
    /// Weights start uniform in `(-init_range, init_range)`; biases at zero.
    pub init_range: f64,
    /// Fit a standardizing scaler on the training rows.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![13, 12, 8, 1],
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 100,
            batch_size: 100,
            validation_split: 0.2,
            init_range: 0.05,
            standardize: true,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(MlpError::InvalidConfig("need at least input and output layers, all non-empty"));
        }
        if *self.layer_sizes.last().unwrap() != 1 {
            return Err(MlpError::InvalidConfig("output layer must have one unit"));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return Err(MlpError::InvalidConfig("validation_split must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(MlpError::InvalidConfig("batch_size must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(MlpError::InvalidConfig("learning_rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `weights[l][out][in]`.
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub config: MlpConfig,
    pub scaler: Option<Scaler>,
    pub history: Vec<EpochStats>,
}

/// Stable `-[t ln s(z) + (1 - t) ln(1 - s(z))]`.
#[inline]
fn bce_with_logit(z: f64, t: f64) -> f64 {
    z.max(0.0) - z * t + math::ln_1p(math::exp(-z.abs()))
}

#[inline]
fn target(label: Label) -> f64 {
    match label {
        Label::Speech => 1.0,
        Label::NonSpeech => 0.0,
    }
}

impl MlpModel {
    /// Weights drawn from the config's seed; zero biases; no scaler.
    pub fn init(config: &MlpConfig) -> Result<Self, MlpError> {
        config.validate()?;
        let mut rng = crate::rng_from_seed(config.seed);
        Ok(Self::init_with(config, &mut rng))
    }

    fn init_with(config: &MlpConfig, rng: &mut crate::Rng) -> Self {
        let r = config.init_range;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in config.layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            weights.push(
                (0..fan_out)
                    .map(|_| (0..fan_in).map(|_| if r > 0.0 { rng.random_range(-r..r) } else { 0.0 }).collect())
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            weights,
            biases,
            config: config.clone(),
            scaler: None,
            history: Vec::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.config.layer_sizes[0]
    }

    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        if x.len() != self.input_dim() {
            return Err(MlpError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(match &self.scaler {
            Some(s) => s.apply(x).expect("scaler dimension matches the input layer"),
            None => x.to_vec(),
        })
    }

    /// Activations of every layer for an already-scaled input. The last entry
    /// is the output logit (before the sigmoid).
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.weights.len();
        let mut acts = Vec::with_capacity(n_layers + 1);
        acts.push(x.to_vec());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = &acts[l];
            let out: Vec<f64> = w
                .iter()
                .zip(b)
                .map(|(row, bias)| {
                    let z = row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + bias;
                    if l + 1 < n_layers {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Post-ReLU activations of each hidden layer.
    pub fn hidden_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, MlpError> {
        let x = self.prepare(x)?;
        let acts = self.activations(&x);
        Ok(acts[1..acts.len() - 1].to_vec())
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64, MlpError> {
        let x = self.prepare(x)?;
        Ok(self.activations(&x).last().unwrap()[0])
    }

    /// Speech probability in `(0, 1)`.
    pub fn forward(&self, x: &[f64]) -> Result<f64, MlpError> {
        Ok(math::sigmoid(self.logit(x)?).clamp(PROB_EPS, 1.0 - PROB_EPS))
    }

    /// Speech iff `forward(x) >= 0.5`.
    pub fn predict_label(&self, x: &[f64]) -> Result<Label, MlpError> {
        Ok(Label::from_score(self.forward(x)?, 0.5))
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len() * w[0].len()).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Parameters flattened layer by layer: weights row-major, then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for row in w {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_flat(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for row in w.iter_mut() {
                let n = row.len();
                row.copy_from_slice(&params[k..k + n]);
                k += n;
            }
            let n = b.len();
            b.copy_from_slice(&params[k..k + n]);
            k += n;
        }
    }

    /// Mean BCE over already-scaled rows and its gradient, flattened like
    /// [`MlpModel::flatten`].
    pub fn loss_and_gradient(&self, rows: &[&[f64]], targets: &[f64]) -> (f64, Vec<f64>) {
        let n_layers = self.weights.len();
        let scale = 1.0 / rows.len() as f64;
        let mut grad_w: Vec<Vec<Vec<f64>>> = self.weights.iter().map(|w| vec![vec![0.0; w[0].len()]; w.len()]).collect();
        let mut grad_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut loss = 0.0;
        for (x, &t) in rows.iter().zip(targets) {
            let acts = self.activations(x);
            let z = acts[n_layers][0];
            loss += bce_with_logit(z, t) * scale;
            let mut delta = vec![(math::sigmoid(z) - t) * scale];
            for l in (0..n_layers).rev() {
                let input = &acts[l];
                for (o, d) in delta.iter().enumerate() {
                    grad_b[l][o] += d;
                    for (g, a) in grad_w[l][o].iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if l > 0 {
                    // Back through the ReLU of layer l-1's output.
                    delta = (0..input.len())
                        .map(|i| {
                            if input[i] > 0.0 {
                                delta.iter().enumerate().map(|(o, d)| d * self.weights[l][o][i]).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for (w, b) in grad_w.iter().zip(&grad_b) {
            for row in w {
                flat.extend_from_slice(row);
            }
            flat.extend_from_slice(b);
        }
        (loss, flat)
    }

    fn evaluate_scaled(&self, rows: &[&[f64]], targets: &[f64]) -> (f64, f64) {
        let mut loss = 0.0;
        let mut correct = 0usize;
        for (x, &t) in rows.iter().zip(targets) {
            let z = self.activations(x).last().unwrap()[0];
            loss += bce_with_logit(z, t);
            if (z >= 0.0) == (t >= 0.5) {
                correct += 1;
            }
        }
        let n = rows.len() as f64;
        (loss / n, correct as f64 / n)
    }
}

/// Trains with mini-batch Adam. The last `validation_split` share of a
/// seeded shuffle is held out for per-epoch validation metrics; the final
/// short batch of each epoch is kept.
pub fn train_mlp(data: &Dataset, config: &MlpConfig) -> Result<MlpModel, MlpError> {
    config.validate()?;
    if data.is_empty() {
        return Err(MlpError::EmptyDataset);
    }
    if data.dim() != config.layer_sizes[0] {
        return Err(MlpError::DimensionMismatch {
            expected: config.layer_sizes[0],
            got: data.dim(),
        });
    }
    let mut rng = crate::rng_from_seed(config.seed);
    let mut model = MlpModel::init_with(config, &mut rng);

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_val = (data.len() as f64 * config.validation_split) as usize;
    let n_train = (data.len() - n_val).max(1);
    let (train_idx, val_idx) = order.split_at(n_train.min(order.len()));

    if config.standardize {
        model.scaler = Some(Scaler::fit(train_idx.iter().map(|&i| data.row(i))).expect("training split is non-empty"));
    }
    let scale_row = |i: usize| -> Vec<f64> {
        match &model.scaler {
            Some(s) => s.apply(data.row(i)).expect("dimension checked above"),
            None => data.row(i).to_vec(),
        }
    };
    let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| scale_row(i)).collect();
    let train_t: Vec<f64> = train_idx.iter().map(|&i| target(data.label(i))).collect();
    let val_rows: Vec<Vec<f64>> = val_idx.iter().map(|&i| scale_row(i)).collect();
    let val_t: Vec<f64> = val_idx.iter().map(|&i| target(data.label(i))).collect();
    let train_refs: Vec<&[f64]> = train_rows.iter().map(Vec::as_slice).collect();
    let val_refs: Vec<&[f64]> = val_rows.iter().map(Vec::as_slice).collect();

    let n_params = model.param_count();
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let mut step = 0i32;
    let mut params = model.flatten();
    let mut batch_order: Vec<usize> = (0..train_rows.len()).collect();

    for _ in 0..config.epochs {
        batch_order.shuffle(&mut rng);
        for batch in batch_order.chunks(config.batch_size) {
            let rows: Vec<&[f64]> = batch.iter().map(|&i| train_refs[i]).collect();
            let targets: Vec<f64> = batch.iter().map(|&i| train_t[i]).collect();
            let (_, grad) = model.loss_and_gradient(&rows, &targets);
            step += 1;
            let bc1 = 1.0 - math::powf(config.beta1, step as f64);
            let bc2 = 1.0 - math::powf(config.beta2, step as f64);
            for k in 0..n_params {
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * grad[k];
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                params[k] -= config.learning_rate * m_hat / (math::sqrt(v_hat) + config.epsilon);
            }
            model.set_flat(&params);
        }
        let (train_loss, train_accuracy) = model.evaluate_scaled(&train_refs, &train_t);
        let (val_loss, val_accuracy) = if val_refs.is_empty() {
            (None, None)
        } else {
            let (l, a) = model.evaluate_scaled(&val_refs, &val_t);
            (Some(l), Some(a))
        };
        model.history.push(EpochStats {
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });
    }
    Ok(model)
}
