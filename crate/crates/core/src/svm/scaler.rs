use alloc::vec::Vec;

use super::SvmError;
use crate::dataset::Dataset;
use crate::math;

/// Per-dimension standardization `(x - mean) / std` with population std.
/// Zero-variance dimensions get `std = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit<'r, I>(rows: I) -> Result<Self, SvmError>
    where
        I: IntoIterator<Item = &'r [f64]>,
    {
        let mut rows = rows.into_iter().peekable();
        let dim = rows.peek().ok_or(SvmError::EmptyDataset)?.len();
        let mut count = 0usize;
        let mut sum = alloc::vec![0.0; dim];
        let mut sum_sq = alloc::vec![0.0; dim];
        let mut collected: Vec<&[f64]> = Vec::new();
        for row in rows {
            if row.len() != dim {
                return Err(SvmError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
            collected.push(row);
            count += 1;
        }
        let n = count as f64;
        let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
        // Two-pass variance.
        for row in &collected {
            for ((acc, v), m) in sum_sq.iter_mut().zip(row.iter()).zip(&means) {
                *acc += (v - m) * (v - m);
            }
        }
        let stds = sum_sq
            .iter()
            .map(|ss| {
                let sd = math::sqrt(ss / n);
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn fit_dataset(data: &Dataset) -> Result<Self, SvmError> {
        Self::fit(data.rows())
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>, SvmError> {
        if row.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((x, m), s)| (x - m) / s)
            .collect())
    }

    pub fn apply_dataset(&self, data: &Dataset) -> Result<Dataset, SvmError> {
        let mut out = Dataset::new(data.dim());
        for i in 0..data.len() {
            out.push(&self.apply(data.row(i))?, data.label(i));
        }
        Ok(out)
    }
}
