//! Exhaustive (C, gamma) selection by stratified k-fold cross-validation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::model::train_svm_lenient;
use super::{SvmError, SvmHyperparams};
use crate::dataset::{Dataset, Label};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSpec {
    /// `C` in `2^-5, 2^-3, ..., 2^15`, `gamma` in `2^-15, 2^-13, ..., 2^3`,
    /// two folds.
    fn default() -> Self {
        Self {
            c_values: (-5..=15).step_by(2).map(|e| math::powf(2.0, e as f64)).collect(),
            gamma_values: (-15..=3).step_by(2).map(|e| math::powf(2.0, e as f64)).collect(),
            folds: 2,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), SvmError> {
        if self.c_values.is_empty() || self.gamma_values.is_empty() {
            return Err(SvmError::InvalidHyperparams("grid lists must be non-empty"));
        }
        if self.folds < 2 {
            return Err(SvmError::InvalidHyperparams("need at least two folds"));
        }
        Ok(())
    }

    /// Every `(C, gamma)` pair, C-major in the given order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.c_values
            .iter()
            .flat_map(|&c| self.gamma_values.iter().map(move |&g| (c, g)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: SvmHyperparams,
    pub cv_accuracy: f64,
    pub cells: Vec<GridCell>,
}

/// Fold index per row. Each class is shuffled separately with the seeded RNG
/// and dealt round-robin, so every fold holds both classes.
pub fn stratified_folds(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>, SvmError> {
    if data.is_empty() {
        return Err(SvmError::EmptyDataset);
    }
    if !data.has_both_classes() {
        return Err(SvmError::SingleClass);
    }
    let (pos, neg) = data.class_counts();
    if pos < folds || neg < folds {
        return Err(SvmError::FoldTooSmall { folds });
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut assignment = alloc::vec![0usize; data.len()];
    for class in [Label::Speech, Label::NonSpeech] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.label(i) == class).collect();
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

/// Mean per-fold accuracy of `hp` under a fixed fold assignment.
pub fn cv_accuracy(data: &Dataset, assignment: &[usize], folds: usize, hp: &SvmHyperparams) -> Result<f64, SvmError> {
    let mut total = 0.0;
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != fold).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == fold).collect();
        let model = train_svm_lenient(&data.subset(&train_idx), hp)?;
        let mut correct = 0usize;
        for &i in &test_idx {
            if model.predict_label(data.row(i))? == data.label(i) {
                correct += 1;
            }
        }
        total += correct as f64 / test_idx.len() as f64;
    }
    Ok(total / folds as f64)
}

/// Highest accuracy wins; ties go to the smaller C, then the smaller gamma.
pub fn select_best(cells: &[GridCell]) -> Option<GridCell> {
    cells.iter().copied().reduce(|best, cell| {
        let better = cell.cv_accuracy > best.cv_accuracy
            || (cell.cv_accuracy == best.cv_accuracy && (cell.c, cell.gamma) < (best.c, best.gamma));
        if better {
            cell
        } else {
            best
        }
    })
}

/// Sequential grid search. `base` supplies tol, iteration cap and cache size.
pub fn grid_search(data: &Dataset, grid: &GridSpec, base: &SvmHyperparams, seed: u64) -> Result<GridResult, SvmError> {
    grid.validate()?;
    let assignment = stratified_folds(data, grid.folds, seed)?;
    let cells = grid
        .cells()
        .into_iter()
        .map(|(c, gamma)| {
            let hp = SvmHyperparams { c, gamma, ..*base };
            cv_accuracy(data, &assignment, grid.folds, &hp).map(|acc| GridCell {
                c,
                gamma,
                cv_accuracy: acc,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let best = select_best(&cells).expect("grid is non-empty");
    Ok(GridResult {
        best: SvmHyperparams {
            c: best.c,
            gamma: best.gamma,
            ..*base
        },
        cv_accuracy: best.cv_accuracy,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussians(seed: u64, n: usize, sep: f64) -> Dataset {
        let mut rng = crate::rng_from_seed(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut ds = Dataset::new(2);
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Speech } else { Label::NonSpeech };
            let shift = label.sign() * sep / 2.0;
            ds.push(&[normal.sample(&mut rng) + shift, normal.sample(&mut rng)], label);
        }
        ds
    }

    #[test]
    fn default_grid_ranges() {
        let g = GridSpec::default();
        assert_eq!(g.c_values.len(), 11);
        assert_eq!(g.c_values[0], 2f64.powi(-5));
        assert_eq!(*g.c_values.last().unwrap(), 2f64.powi(15));
        assert_eq!(g.gamma_values.len(), 10);
        assert_eq!(g.gamma_values[0], 2f64.powi(-15));
        assert_eq!(*g.gamma_values.last().unwrap(), 8.0);
        assert_eq!(g.folds, 2);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let ds = gaussians(1, 41, 2.0);
        let a = stratified_folds(&ds, 2, 7).unwrap();
        assert_eq!(a, stratified_folds(&ds, 2, 7).unwrap());
        assert_ne!(a, stratified_folds(&ds, 2, 8).unwrap());
        for fold in 0..2 {
            let idx: Vec<usize> = (0..ds.len()).filter(|&i| a[i] == fold).collect();
            assert!(ds.subset(&idx).has_both_classes());
        }
    }

    #[test]
    fn single_cell_grid() {
        let ds = gaussians(2, 60, 3.0);
        let grid = GridSpec {
            c_values: vec![1.0],
            gamma_values: vec![0.5],
            folds: 2,
        };
        let res = grid_search(&ds, &grid, &SvmHyperparams::default(), 0).unwrap();
        assert_eq!((res.best.c, res.best.gamma), (1.0, 0.5));
        let folds = stratified_folds(&ds, 2, 0).unwrap();
        let acc = cv_accuracy(&ds, &folds, 2, &res.best).unwrap();
        assert_eq!(res.cv_accuracy, acc);
    }

    #[test]
    fn ties_prefer_small_c_then_small_gamma() {
        let cells = [
            GridCell { c: 4.0, gamma: 0.1, cv_accuracy: 0.9 },
            GridCell { c: 1.0, gamma: 0.5, cv_accuracy: 0.9 },
            GridCell { c: 1.0, gamma: 0.2, cv_accuracy: 0.9 },
            GridCell { c: 0.5, gamma: 0.1, cv_accuracy: 0.8 },
        ];
        let best = select_best(&cells).unwrap();
        assert_eq!((best.c, best.gamma), (1.0, 0.2));
    }

    #[test]
    fn identical_cells_pick_smaller_c() {
        // Duplicate gamma with two C values large enough that nothing is
        // bounded: both reach the same CV accuracy.
        let ds = gaussians(3, 40, 8.0);
        let grid = GridSpec {
            c_values: vec![1000.0, 100.0],
            gamma_values: vec![0.1],
            folds: 2,
        };
        let res = grid_search(&ds, &grid, &SvmHyperparams::default(), 1).unwrap();
        assert_eq!(res.cells[0].cv_accuracy, res.cells[1].cv_accuracy);
        assert_eq!(res.best.c, 100.0);
    }

    #[test]
    fn separated_gaussians_cv_high() {
        let ds = gaussians(4, 200, 5.0);
        let grid = GridSpec {
            c_values: vec![0.5, 2.0, 8.0],
            gamma_values: vec![0.125, 0.5, 2.0],
            folds: 2,
        };
        let res = grid_search(&ds, &grid, &SvmHyperparams::default(), 5).unwrap();
        assert!(res.cv_accuracy >= 0.95, "cv accuracy {}", res.cv_accuracy);
        assert_eq!(res.cells.len(), 9);
    }

    #[test]
    fn single_class_is_error() {
        let mut ds = Dataset::new(1);
        let mut rng = crate::rng_from_seed(0);
        for _ in 0..10 {
            ds.push(&[rng.random()], Label::Speech);
        }
        assert_eq!(
            grid_search(&ds, &GridSpec::default(), &SvmHyperparams::default(), 0),
            Err(SvmError::SingleClass)
        );
    }
}
