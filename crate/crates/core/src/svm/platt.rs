//! Platt sigmoid `P(speech | f) = 1 / (1 + exp(A f + B))` fitted by
//! regularized maximum likelihood.
//!
//! Targets are prior-corrected, `t+ = (N+ + 1) / (N+ + 2)` and
//! `t- = 1 / (N- + 2)`, and the negative log-likelihood is minimized with
//! Newton's method and a backtracking line search (Lin, Lin and Weng's
//! formulation, which avoids overflow in the exponentials).

use alloc::vec::Vec;

use crate::dataset::Label;
use crate::math;

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
const GRAD_EPS: f64 = 1e-5;

/// `(t+, t-)` for the given labels.
pub fn platt_targets(labels: &[Label]) -> (f64, f64) {
    let pos = labels.iter().filter(|&&l| l == Label::Speech).count() as f64;
    let neg = labels.len() as f64 - pos;
    ((pos + 1.0) / (pos + 2.0), 1.0 / (neg + 2.0))
}

#[inline]
fn nll_term(f_apb: f64, t: f64) -> f64 {
    if f_apb >= 0.0 {
        t * f_apb + math::ln_1p(math::exp(-f_apb))
    } else {
        (t - 1.0) * f_apb + math::ln_1p(math::exp(f_apb))
    }
}

/// Negative log-likelihood of `(a, b)` against the prior-corrected targets.
pub fn platt_nll(scores: &[f64], labels: &[Label], a: f64, b: f64) -> f64 {
    let (hi, lo) = platt_targets(labels);
    scores
        .iter()
        .zip(labels)
        .map(|(&f, &l)| nll_term(a * f + b, if l == Label::Speech { hi } else { lo }))
        .sum()
}

/// Sigmoid probability of the positive class for decision value `f`.
#[inline]
pub fn platt_probability(f: f64, a: f64, b: f64) -> f64 {
    math::sigmoid(-(a * f + b))
}

/// Fits `(A, B)`. Works with any label mix, including a single class.
pub fn fit_platt(scores: &[f64], labels: &[Label]) -> (f64, f64) {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let (hi, lo) = platt_targets(labels);
    let targets: Vec<f64> = labels.iter().map(|&l| if l == Label::Speech { hi } else { lo }).collect();
    let pos = labels.iter().filter(|&&l| l == Label::Speech).count() as f64;
    let neg = labels.len() as f64 - pos;

    let mut a = 0.0;
    let mut b = math::ln((neg + 1.0) / (pos + 1.0));
    let objective = |a: f64, b: f64| -> f64 { scores.iter().zip(&targets).map(|(&f, &t)| nll_term(a * f + b, t)).sum() };
    let mut fval = objective(a, b);

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&f, &t) in scores.iter().zip(&targets) {
            let f_apb = f * a + b;
            let (p, q) = if f_apb >= 0.0 {
                let e = math::exp(-f_apb);
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = math::exp(f_apb);
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < GRAD_EPS && g2.abs() < GRAD_EPS {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut accepted = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    (a, b)
}
