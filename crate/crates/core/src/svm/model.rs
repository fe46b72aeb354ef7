use alloc::boxed::Box;
use alloc::vec::Vec;

use super::kernel::rbf;
use super::platt::{fit_platt, platt_probability};
use super::scaler::Scaler;
use super::smo::SmoSolver;
use super::{SvmError, SvmHyperparams};
use crate::dataset::{Dataset, Label};

/// Probabilities are kept this far from 0 and 1.
const PROB_EPS: f64 = 1e-12;

/// A trained RBF SVM with its input scaler and Platt calibration.
///
/// Support vectors are stored in the standardized space the model was
/// trained in; [`SvmModel::decision`] standardizes its input first.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub hyperparams: SvmHyperparams,
    pub platt_a: f64,
    pub platt_b: f64,
    pub scaler: Scaler,
    /// Training-set indices of the support vectors (empty for loaded models).
    pub support_indices: Vec<usize>,
    pub iterations: usize,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x) = sum_i coef_i K(sv_i, standardize(x)) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64, SvmError> {
        self.check_dim(x)?;
        let z = self.scaler.apply(x)?;
        Ok(self.decision_standardized(&z))
    }

    pub(crate) fn decision_standardized(&self, z: &[f64]) -> f64 {
        let gamma = self.hyperparams.gamma;
        self.support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, coef)| coef * rbf(sv, z, gamma))
            .sum::<f64>()
            + self.bias
    }

    /// Hard label: speech iff `decision >= 0`.
    pub fn predict_label(&self, x: &[f64]) -> Result<Label, SvmError> {
        Ok(Label::from_score(self.decision(x)?, 0.0))
    }

    /// Calibrated speech probability, strictly inside `(0, 1)`.
    pub fn predict_prob(&self, x: &[f64]) -> Result<f64, SvmError> {
        Ok(self.prob_from_decision(self.decision(x)?))
    }

    pub fn prob_from_decision(&self, f: f64) -> f64 {
        platt_probability(f, self.platt_a, self.platt_b).clamp(PROB_EPS, 1.0 - PROB_EPS)
    }
}

/// Trains one model: standardize, SMO, then Platt on the training decision
/// values. A run that hits `max_iter` still yields its model inside
/// [`SvmError::IterationLimit`].
pub fn train_svm(data: &Dataset, hp: &SvmHyperparams) -> Result<SvmModel, SvmError> {
    hp.validate()?;
    if data.is_empty() {
        return Err(SvmError::EmptyDataset);
    }
    if !data.has_both_classes() {
        return Err(SvmError::SingleClass);
    }
    let scaler = Scaler::fit_dataset(data)?;
    let scaled = scaler.apply_dataset(data)?;
    let solution = SmoSolver {
        c: hp.c,
        gamma: hp.gamma,
        tol: hp.tol,
        max_iter: hp.max_iter,
        cache_rows: hp.cache_rows,
        trace_objective: false,
    }
    .solve(&scaled);

    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    let mut support_indices = Vec::new();
    for (i, &a) in solution.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(scaled.row(i).to_vec());
            dual_coeffs.push(a * scaled.label(i).sign());
            support_indices.push(i);
        }
    }

    let decisions = solution.training_decisions(&scaled);
    let (platt_a, platt_b) = fit_platt(&decisions, scaled.labels());

    let model = SvmModel {
        support_vectors,
        dual_coeffs,
        bias: -solution.rho,
        hyperparams: *hp,
        platt_a,
        platt_b,
        scaler,
        support_indices,
        iterations: solution.iterations,
    };
    if solution.converged {
        Ok(model)
    } else {
        Err(SvmError::IterationLimit(Box::new(model)))
    }
}

/// Like [`train_svm`] but accepts a model that stopped at the iteration cap.
pub(crate) fn train_svm_lenient(data: &Dataset, hp: &SvmHyperparams) -> Result<SvmModel, SvmError> {
    match train_svm(data, hp) {
        Err(SvmError::IterationLimit(model)) => Ok(*model),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;
    use crate::svm::rbf_kernel;
    use rand::Rng;

    fn pair() -> Dataset {
        Dataset::from_rows(1, &[[-1.0], [1.0]], &[Label::NonSpeech, Label::Speech])
    }

    #[test]
    fn symmetric_pair() {
        let model = train_svm(&pair(), &SvmHyperparams::new(10.0, 0.5)).unwrap();
        assert!(model.bias.abs() < 1e-6);
        assert!(model.decision(&[0.0]).unwrap().abs() < 1e-6);
        // Far-away mirror points get complementary probabilities when B ~ 0.
        assert!(model.platt_b.abs() < 1e-6);
        let p = model.predict_prob(&[0.7]).unwrap();
        let q = model.predict_prob(&[-0.7]).unwrap();
        assert!((p + q - 1.0).abs() < 1e-3);
        let mid = model.predict_prob(&[0.0]).unwrap();
        assert!((mid - 1.0 / (1.0 + model.platt_b.exp())).abs() < 1e-9);
    }

    #[test]
    fn xor_fits() {
        let ds = Dataset::from_rows(
            2,
            &[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]],
            &[Label::Speech, Label::Speech, Label::NonSpeech, Label::NonSpeech],
        );
        let model = train_svm(&ds, &SvmHyperparams::new(10.0, 1.0)).unwrap();
        for i in 0..4 {
            assert_eq!(model.predict_label(ds.row(i)).unwrap(), ds.label(i));
        }
    }

    #[test]
    fn single_class_rejected() {
        let ds = Dataset::from_rows(1, &[[0.0], [1.0]], &[Label::Speech, Label::Speech]);
        assert_eq!(train_svm(&ds, &SvmHyperparams::new(1.0, 1.0)), Err(SvmError::SingleClass));
        assert_eq!(train_svm(&Dataset::new(1), &SvmHyperparams::new(1.0, 1.0)), Err(SvmError::EmptyDataset));
        assert!(matches!(
            train_svm(&pair(), &SvmHyperparams::new(-1.0, 1.0)),
            Err(SvmError::InvalidHyperparams(_))
        ));
    }

    #[test]
    fn decision_equals_hand_expansion() {
        let mut rng = rng_from_seed(11);
        let mut ds = Dataset::new(3);
        for i in 0..40 {
            let row: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let label = if row[0] + row[1] * row[2] > 0.0 || i == 0 { Label::Speech } else { Label::NonSpeech };
            ds.push(&row, label);
        }
        let model = train_svm(&ds, &SvmHyperparams::new(2.0, 0.7)).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let z: Vec<f64> = (0..3).map(|d| (x[d] - model.scaler.means[d]) / model.scaler.stds[d]).collect();
            let mut expected = model.bias;
            for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coeffs) {
                expected += coef * rbf_kernel(sv, &z, 0.7).unwrap();
            }
            assert!((model.decision(&x).unwrap() - expected).abs() < 1e-12);
        }
        assert!(matches!(model.decision(&[0.0]), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn separable_support_vectors_classified_correctly() {
        let ds = Dataset::from_rows(
            2,
            &[[0.0, 0.0], [0.2, 0.1], [0.1, 0.3], [3.0, 3.0], [3.2, 2.9], [2.8, 3.1]],
            &[
                Label::NonSpeech,
                Label::NonSpeech,
                Label::NonSpeech,
                Label::Speech,
                Label::Speech,
                Label::Speech,
            ],
        );
        let model = train_svm(&ds, &SvmHyperparams::new(100.0, 0.5)).unwrap();
        assert!(!model.support_indices.is_empty());
        for &i in &model.support_indices {
            assert_eq!(model.predict_label(ds.row(i)).unwrap(), ds.label(i));
        }
    }

    #[test]
    fn iteration_limit_carries_model() {
        let mut rng = rng_from_seed(2);
        let mut ds = Dataset::new(2);
        for i in 0..60 {
            let row = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            ds.push(&row, if i % 2 == 0 { Label::Speech } else { Label::NonSpeech });
        }
        let hp = SvmHyperparams {
            max_iter: 2,
            ..SvmHyperparams::new(50.0, 3.0)
        };
        let err = train_svm(&ds, &hp).unwrap_err();
        let model = err.into_unconverged_model().expect("model returned");
        assert_eq!(model.iterations, 2);
        assert!(train_svm_lenient(&ds, &hp).is_ok());
    }

    #[test]
    fn probabilities_in_open_interval() {
        let model = train_svm(&pair(), &SvmHyperparams::new(10.0, 0.5)).unwrap();
        for x in [-1e6, -3.0, 0.0, 3.0, 1e6] {
            let p = model.predict_prob(&[x]).unwrap();
            assert!(p > 0.0 && p < 1.0);
        }
    }
}
