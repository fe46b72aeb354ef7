//! Two-layer stacked SVM ensemble.
//!
//! The training set is shuffled and split into `n + 1` disjoint parts.
//! Member `i` is trained on part `i`; every member then scores the held-out
//! last part, and the `n` speech probabilities of each held-out row become
//! the input of an output-layer SVM trained on that part's labels.
//!
//! Member jobs are independent, so training is split into
//! [`EnsemblePlan::train_member`] and [`EnsemblePlan::finish`]; callers may
//! run the member jobs on any schedule and get the same model.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::dataset::{Dataset, Label};
use crate::svm::{grid_search, train_svm, GridSpec, SvmError, SvmHyperparams, SvmModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnsembleError {
    #[error("cannot split {rows} rows into {parts} parts")]
    TooFewRows { rows: usize, parts: usize },
    #[error("partition {part} contains a single class")]
    SingleClassPartition { part: usize },
    #[error("invalid ensemble config: {0}")]
    InvalidConfig(&'static str),
    #[error("member {index}: {source}")]
    Member { index: usize, source: SvmError },
    #[error("output layer: {0}")]
    Meta(SvmError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// How a layer's `(C, gamma)` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum HyperparamChoice {
    Fixed(SvmHyperparams),
    /// One grid search on the first partition, reused by every member. For
    /// the output layer, a grid search on the held-out part.
    Grid(GridSpec),
    /// A separate grid search per member (output layer: same as `Grid`).
    PerMemberGrid(GridSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_members: usize,
    pub member_hp: HyperparamChoice,
    pub meta_hp: HyperparamChoice,
    /// Tolerance, iteration cap and cache size for grid-searched layers.
    pub base: SvmHyperparams,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_members: 5,
            member_hp: HyperparamChoice::Grid(GridSpec::default()),
            meta_hp: HyperparamChoice::Grid(GridSpec::default()),
            base: SvmHyperparams::default(),
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn n_partitions(&self) -> usize {
        self.n_members + 1
    }

    /// RNG seed for member `index`'s grid search.
    pub fn member_seed(&self, index: usize) -> u64 {
        self.seed ^ index as u64
    }

    /// RNG seed for the output layer of an `n`-member ensemble.
    pub fn meta_seed(&self, n_members: usize) -> u64 {
        self.seed ^ n_members as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub members: Vec<SvmModel>,
    pub meta: SvmModel,
    pub seed: u64,
    /// SVM layers in the stack; always 2.
    pub layers: usize,
}

impl EnsembleModel {
    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Final speech probability from the output layer, with the label
    /// (speech iff `prob >= 0.5`).
    pub fn predict(&self, x: &[f64]) -> Result<(f64, Label), SvmError> {
        let features = meta_features(&self.members, x)?;
        let prob = self.meta.predict_prob(&features)?;
        Ok((prob, Label::from_score(prob, 0.5)))
    }
}

/// Each member's speech probability for `x`, in member order.
pub fn meta_features(members: &[SvmModel], x: &[f64]) -> Result<Vec<f64>, SvmError> {
    members.iter().map(|m| m.predict_prob(x)).collect()
}

/// Seeded shuffle, then a contiguous split into `n_parts` nearly equal parts
/// (earlier parts take the remainder). Every part must hold both classes.
pub fn partition(data: &Dataset, n_parts: usize, seed: u64) -> Result<Vec<Dataset>, EnsembleError> {
    if n_parts == 0 {
        return Err(EnsembleError::InvalidConfig("need at least one part"));
    }
    if data.len() < n_parts {
        return Err(EnsembleError::TooFewRows {
            rows: data.len(),
            parts: n_parts,
        });
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut crate::rng_from_seed(seed));
    let base = data.len() / n_parts;
    let rem = data.len() % n_parts;
    let mut parts = Vec::with_capacity(n_parts);
    let mut start = 0;
    for p in 0..n_parts {
        let size = base + usize::from(p < rem);
        let part = data.subset(&order[start..start + size]);
        if !part.has_both_classes() {
            return Err(EnsembleError::SingleClassPartition { part: p });
        }
        parts.push(part);
        start += size;
    }
    Ok(parts)
}

fn resolve(choice: &HyperparamChoice, base: &SvmHyperparams, data: &Dataset, seed: u64) -> Result<SvmHyperparams, SvmError> {
    match choice {
        HyperparamChoice::Fixed(hp) => Ok(*hp),
        HyperparamChoice::Grid(grid) | HyperparamChoice::PerMemberGrid(grid) => Ok(grid_search(data, grid, base, seed)?.best),
    }
}

/// Partitioned data and resolved shared hyperparameters, ready for member
/// training.
#[derive(Debug, Clone)]
pub struct EnsemblePlan {
    pub config: EnsembleConfig,
    /// `n_members` training parts followed by the held-out part.
    pub parts: Vec<Dataset>,
    shared_hp: Option<SvmHyperparams>,
}

impl EnsemblePlan {
    pub fn new(data: &Dataset, config: &EnsembleConfig) -> Result<Self, EnsembleError> {
        if config.n_members == 0 {
            return Err(EnsembleError::InvalidConfig("n_members must be at least 1"));
        }
        let parts = partition(data, config.n_partitions(), config.seed)?;
        let shared_hp = match &config.member_hp {
            HyperparamChoice::PerMemberGrid(_) => None,
            choice => Some(
                resolve(choice, &config.base, &parts[0], config.member_seed(0))
                    .map_err(|source| EnsembleError::Member { index: 0, source })?,
            ),
        };
        Ok(Self {
            config: config.clone(),
            parts,
            shared_hp,
        })
    }

    pub fn n_members(&self) -> usize {
        self.config.n_members
    }

    pub fn held_out(&self) -> &Dataset {
        &self.parts[self.config.n_members]
    }

    /// Trains member `index` on its part. Pure in `self`.
    pub fn train_member(&self, index: usize) -> Result<SvmModel, EnsembleError> {
        let part = &self.parts[index];
        let wrap = |source| EnsembleError::Member { index, source };
        let hp = match self.shared_hp {
            Some(hp) => hp,
            None => resolve(&self.config.member_hp, &self.config.base, part, self.config.member_seed(index)).map_err(wrap)?,
        };
        train_svm(part, &hp).map_err(wrap)
    }

    /// Meta-feature dataset of the held-out part under `members`.
    pub fn meta_dataset(&self, members: &[SvmModel]) -> Result<Dataset, EnsembleError> {
        let held_out = self.held_out();
        let mut meta = Dataset::new(members.len());
        for i in 0..held_out.len() {
            meta.push(&meta_features(members, held_out.row(i))?, held_out.label(i));
        }
        Ok(meta)
    }

    /// Trains the output layer over the given members (any prefix of the
    /// planned members is allowed).
    pub fn finish(&self, members: Vec<SvmModel>) -> Result<EnsembleModel, EnsembleError> {
        if members.is_empty() || members.len() > self.n_members() {
            return Err(EnsembleError::InvalidConfig("member count outside the plan"));
        }
        let meta_data = self.meta_dataset(&members)?;
        let seed = self.config.meta_seed(members.len());
        let hp = resolve(&self.config.meta_hp, &self.config.base, &meta_data, seed).map_err(EnsembleError::Meta)?;
        let meta = train_svm(&meta_data, &hp).map_err(EnsembleError::Meta)?;
        Ok(EnsembleModel {
            members,
            meta,
            seed: self.config.seed,
            layers: 2,
        })
    }
}

/// Sequential ensemble training.
pub fn train_ensemble(data: &Dataset, config: &EnsembleConfig) -> Result<EnsembleModel, EnsembleError> {
    let plan = EnsemblePlan::new(data, config)?;
    let members = (0..plan.n_members())
        .map(|i| plan.train_member(i))
        .collect::<Result<Vec<_>, _>>()?;
    plan.finish(members)
}

/// Accuracy of hard predictions against the dataset's labels.
pub fn dataset_accuracy(data: &Dataset, mut predict: impl FnMut(&[f64]) -> Result<Label, SvmError>) -> Result<f64, SvmError> {
    if data.is_empty() {
        return Err(SvmError::EmptyDataset);
    }
    let mut correct = 0usize;
    for i in 0..data.len() {
        if predict(data.row(i))? == data.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// One row of a member-count sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_members: usize,
    pub ensemble_accuracy: f64,
    /// Stand-alone accuracy of each of the first `n_members` members.
    pub member_accuracies: Vec<f64>,
}

impl SweepRow {
    pub fn mean_member_accuracy(&self) -> f64 {
        self.member_accuracies.iter().sum::<f64>() / self.member_accuracies.len() as f64
    }
}

/// Evaluates ensembles of `1..=n_max` members that share one partition of
/// `n_max + 1` parts: ensemble `n` uses the first `n` members and an output
/// layer retrained on the common held-out part.
pub fn sweep_from_members(plan: &EnsemblePlan, members: &[SvmModel], test: &Dataset) -> Result<Vec<SweepRow>, EnsembleError> {
    let member_acc = members
        .iter()
        .map(|m| dataset_accuracy(test, |x| m.predict_label(x)))
        .collect::<Result<Vec<_>, _>>()?;
    (1..=members.len())
        .map(|n| {
            let ens = plan.finish(members[..n].to_vec())?;
            let acc = dataset_accuracy(test, |x| ens.predict(x).map(|p| p.1))?;
            Ok(SweepRow {
                n_members: n,
                ensemble_accuracy: acc,
                member_accuracies: member_acc[..n].to_vec(),
            })
        })
        .collect()
}

/// Sequential member-count sweep; `config.n_members` is replaced by `n_max`.
pub fn sweep(data: &Dataset, test: &Dataset, config: &EnsembleConfig, n_max: usize) -> Result<Vec<SweepRow>, EnsembleError> {
    let config = EnsembleConfig {
        n_members: n_max,
        ..config.clone()
    };
    let plan = EnsemblePlan::new(data, &config)?;
    let members = (0..n_max).map(|i| plan.train_member(i)).collect::<Result<Vec<_>, _>>()?;
    sweep_from_members(&plan, &members, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64, n: usize, sep: f64, dim: usize) -> Dataset {
        let mut rng = crate::rng_from_seed(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut ds = Dataset::new(dim);
        for _ in 0..n {
            let label = if rng.random::<bool>() { Label::Speech } else { Label::NonSpeech };
            let row: Vec<f64> = (0..dim).map(|d| normal.sample(&mut rng) + if d == 0 { label.sign() * sep / 2.0 } else { 0.0 }).collect();
            ds.push(&row, label);
        }
        ds
    }

    fn alternating(n: usize) -> Dataset {
        let mut ds = Dataset::new(1);
        for i in 0..n {
            ds.push(&[i as f64], if i % 2 == 0 { Label::Speech } else { Label::NonSpeech });
        }
        ds
    }

    fn fixed_config(n: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            n_members: n,
            member_hp: HyperparamChoice::Fixed(SvmHyperparams::new(1.0, 0.5)),
            meta_hp: HyperparamChoice::Fixed(SvmHyperparams::new(1.0, 0.5)),
            base: SvmHyperparams::default(),
            seed,
        }
    }

    #[test]
    fn partition_sizes() {
        let parts = partition(&alternating(600), 6, 1).unwrap();
        assert!(parts.iter().all(|p| p.len() == 100));
        let parts = partition(&alternating(601), 6, 1).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Dataset::len).collect();
        assert_eq!(sizes, vec![101, 100, 100, 100, 100, 100]);
    }

    #[test]
    fn partition_is_seeded_and_covers() {
        let data = alternating(257);
        let a = partition(&data, 6, 42).unwrap();
        assert_eq!(a, partition(&data, 6, 42).unwrap());
        assert_ne!(a, partition(&data, 6, 43).unwrap());
        let mut seen: Vec<f64> = a.iter().flat_map(|p| p.rows().map(|r| r[0]).collect::<Vec<_>>()).collect();
        seen.sort_by(f64::total_cmp);
        let want: Vec<f64> = (0..257).map(|i| i as f64).collect();
        assert_eq!(seen, want);
    }

    #[test]
    fn partition_errors() {
        assert_eq!(
            partition(&alternating(5), 6, 0),
            Err(EnsembleError::TooFewRows { rows: 5, parts: 6 })
        );
        let mut ds = alternating(2);
        for i in 0..10 {
            ds.push(&[100.0 + i as f64], Label::Speech);
        }
        assert!(matches!(partition(&ds, 6, 0), Err(EnsembleError::SingleClassPartition { .. })));
    }

    #[test]
    fn single_member_ensemble_works() {
        let data = blobs(1, 200, 3.0, 2);
        let ens = train_ensemble(&data, &fixed_config(1, 3)).unwrap();
        assert_eq!(ens.meta.dim(), 1);
        let acc = dataset_accuracy(&blobs(2, 200, 3.0, 2), |x| ens.predict(x).map(|p| p.1)).unwrap();
        assert!(acc > 0.8, "accuracy {acc}");
    }

    #[test]
    fn meta_features_follow_member_order() {
        let data = blobs(3, 300, 2.0, 3);
        let ens = train_ensemble(&data, &fixed_config(3, 5)).unwrap();
        let x = [0.3, -0.2, 1.0];
        let f = meta_features(&ens.members, &x).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.iter().all(|&p| p > 0.0 && p < 1.0));
        let reversed: Vec<SvmModel> = ens.members.iter().rev().cloned().collect();
        let mut g = meta_features(&reversed, &x).unwrap();
        g.reverse();
        assert_eq!(f, g);
        assert!(matches!(ens.predict(&[0.0]), Err(SvmError::DimensionMismatch { .. })));
    }

    #[test]
    fn schedule_does_not_matter() {
        let data = blobs(4, 240, 2.0, 2);
        let cfg = fixed_config(4, 9);
        let plan = EnsemblePlan::new(&data, &cfg).unwrap();
        let mut members: Vec<(usize, SvmModel)> = (0..4).rev().map(|i| (i, plan.train_member(i).unwrap())).collect();
        members.sort_by_key(|m| m.0);
        let reversed = plan.finish(members.into_iter().map(|m| m.1).collect()).unwrap();
        assert_eq!(reversed, train_ensemble(&data, &cfg).unwrap());
    }

    #[test]
    fn ensemble_close_to_best_member() {
        let data = blobs(5, 1200, 2.0, 2);
        let test = blobs(6, 600, 2.0, 2);
        let ens = train_ensemble(&data, &fixed_config(5, 1)).unwrap();
        let best = ens
            .members
            .iter()
            .map(|m| dataset_accuracy(&test, |x| m.predict_label(x)).unwrap())
            .fold(0.0, f64::max);
        let acc = dataset_accuracy(&test, |x| ens.predict(x).map(|p| p.1)).unwrap();
        assert!(acc >= best - 0.02, "ensemble {acc} vs best member {best}");
    }

    #[test]
    fn grid_member_hp_is_shared() {
        let data = blobs(7, 300, 3.0, 2);
        let grid = GridSpec {
            c_values: vec![0.5, 4.0],
            gamma_values: vec![0.1, 1.0],
            folds: 2,
        };
        let cfg = EnsembleConfig {
            member_hp: HyperparamChoice::Grid(grid.clone()),
            meta_hp: HyperparamChoice::Grid(grid),
            ..fixed_config(3, 2)
        };
        let ens = train_ensemble(&data, &cfg).unwrap();
        let hp0 = ens.members[0].hyperparams;
        assert!(ens.members.iter().all(|m| m.hyperparams == hp0));
    }

    #[test]
    fn sweep_rows() {
        let data = blobs(8, 700, 2.0, 2);
        let test = blobs(9, 300, 2.0, 2);
        let rows = sweep(&data, &test, &fixed_config(5, 4), 3).unwrap();
        assert_eq!(rows.len(), 3);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.n_members, k + 1);
            assert_eq!(row.member_accuracies.len(), k + 1);
        }
        assert_eq!(rows[2].member_accuracies[..2], rows[1].member_accuracies[..]);
    }
}
