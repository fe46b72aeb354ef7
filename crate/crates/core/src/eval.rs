//! Frame-level accuracy, confusion counts, ROC and AUC.

use alloc::vec::Vec;

use crate::dataset::Label;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("both classes are required")]
    SingleClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: Confusion,
    /// True/false positive rates at the report's threshold.
    pub tpr: f64,
    pub fpr: f64,
    pub auc: f64,
    /// `(fpr, tpr)` points from `(0, 0)` to `(1, 1)`.
    pub roc: Vec<(f64, f64)>,
}

fn check(n_pred: usize, n_labels: usize) -> Result<(), EvalError> {
    if n_pred != n_labels {
        return Err(EvalError::LengthMismatch(n_pred, n_labels));
    }
    if n_pred == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

fn require_both(labels: &[Label]) -> Result<(), EvalError> {
    let pos = labels.iter().any(|&l| l == Label::Speech);
    let neg = labels.iter().any(|&l| l == Label::NonSpeech);
    if pos && neg {
        Ok(())
    } else {
        Err(EvalError::SingleClass)
    }
}

/// Fraction of predictions equal to their labels.
pub fn accuracy(preds: &[Label], labels: &[Label]) -> Result<f64, EvalError> {
    check(preds.len(), labels.len())?;
    let correct = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Counts with the rule "speech iff score >= threshold".
pub fn confusion(scores: &[f64], labels: &[Label], threshold: f64) -> Result<Confusion, EvalError> {
    check(scores.len(), labels.len())?;
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (Label::from_score(s, threshold), l) {
            (Label::Speech, Label::Speech) => c.tp += 1,
            (Label::Speech, Label::NonSpeech) => c.fp += 1,
            (Label::NonSpeech, Label::NonSpeech) => c.tn += 1,
            (Label::NonSpeech, Label::Speech) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `(fpr, tpr)` at `threshold`.
pub fn operating_point(scores: &[f64], labels: &[Label], threshold: f64) -> Result<(f64, f64), EvalError> {
    check(scores.len(), labels.len())?;
    require_both(labels)?;
    let c = confusion(scores, labels, threshold)?;
    Ok((c.fpr(), c.tpr()))
}

/// ROC swept over the distinct scores (descending), with tied scores
/// crossing the threshold together, and its trapezoidal area. The area
/// equals `P(s+ > s-) + P(s+ = s-) / 2`.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<(Vec<(f64, f64)>, f64), EvalError> {
    check(scores.len(), labels.len())?;
    require_both(labels)?;
    let n_pos = labels.iter().filter(|&&l| l == Label::Speech).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut roc = Vec::with_capacity(scores.len() + 1);
    roc.push((0.0, 0.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (prev_tp, prev_fp) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            match labels[order[k]] {
                Label::Speech => tp += 1,
                Label::NonSpeech => fp += 1,
            }
            k += 1;
        }
        // Trapezoid in count units; normalized once at the end.
        auc += (fp - prev_fp) as f64 * (tp + prev_tp) as f64 / 2.0;
        roc.push((fp as f64 / n_neg, tp as f64 / n_pos));
    }
    Ok((roc, auc / (n_pos * n_neg)))
}

/// Full report at `threshold`.
pub fn evaluate(scores: &[f64], labels: &[Label], threshold: f64) -> Result<EvalReport, EvalError> {
    let c = confusion(scores, labels, threshold)?;
    let (roc, auc) = roc_auc(scores, labels)?;
    Ok(EvalReport {
        accuracy: c.accuracy(),
        confusion: c,
        tpr: c.tpr(),
        fpr: c.fpr(),
        auc,
        roc,
    })
}
