//! Parallel drivers around the core library: extraction, grid search,
//! training, sweeps, scoring and corpus synthesis.
//!
//! Every function returns the same result as its sequential counterpart in
//! `vad_core` regardless of the rayon pool size: work items carry their own
//! seeds and results are gathered in input order.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use vad_core::dataset::{Dataset, Label};
use vad_core::ensemble::{
    dataset_accuracy, partition, EnsembleError, EnsembleModel, EnsemblePlan, HyperparamChoice, SweepRow,
};
use vad_core::features::{clip_features, is_silent, speech_energy_percentile, ClipFeatures, LabeledDataset};
use vad_core::nn::train_mlp;
use vad_core::svm::{cv_accuracy, select_best, stratified_folds, train_svm, GridCell, GridResult};
use vad_core::synth::{ClipKind, SynthSpec};
use vad_core::{EnsembleConfig, GateConfig, GridSpec, SvmError, SvmHyperparams, SvmModel};

use crate::config::{RunConfig, Search};
use crate::error::{Error, Result};
use crate::featfile::{FeatureFile, FeatureMeta};
use crate::manifest::{ClipClass, ManifestEntry};
use crate::model_io::Model;
use crate::wav::{load_wav, save_wav};

/// Returns the first error in input order, so failures do not depend on
/// scheduling either.
fn first_error<T, E>(results: Vec<Result<T, E>>) -> Result<Vec<T>, E> {
    results.into_iter().collect()
}

/// Loads and featurizes every manifest entry, then assembles rows in
/// manifest order. The gate threshold is the configured one or, failing
/// that, the configured percentile of speech-frame energies.
pub fn extract(entries: &[ManifestEntry], cfg: &RunConfig, drop_silent: bool) -> Result<FeatureFile> {
    let spec = cfg.frame_spec()?;
    let mfcc = cfg.mfcc_config();
    let clips = first_error(
        entries
            .par_iter()
            .map(|entry| -> Result<ClipFeatures> {
                let clip = load_wav(&entry.resolved)?;
                Ok(ClipFeatures {
                    source_path: entry.path.clone(),
                    label: entry.class.label(),
                    vectors: clip_features(&clip, &spec, &mfcc)?,
                })
            })
            .collect(),
    )?;
    let threshold = cfg
        .gate
        .threshold
        .or_else(|| speech_energy_percentile(&clips, cfg.gate.percentile));
    let gate = threshold.map(|t| GateConfig { energy_threshold: t });
    Ok(FeatureFile {
        dataset: LabeledDataset::from_clips(&clips, gate.as_ref(), drop_silent),
        meta: Some(FeatureMeta {
            gate_threshold: threshold,
            seed: cfg.seed,
            config: cfg.clone(),
        }),
    })
}

/// Rows that survive the gate: speech frames below the threshold are
/// dropped, non-speech frames are always kept.
pub fn gated_rows(ds: &LabeledDataset, gate: Option<&GateConfig>) -> Vec<usize> {
    (0..ds.len())
        .filter(|&i| match gate {
            Some(g) => ds.data.label(i) != Label::Speech || !is_silent(&ds.vector(i), g),
            None => true,
        })
        .collect()
}

/// Grid search with the cells evaluated in parallel.
pub fn grid_search(data: &Dataset, grid: &GridSpec, base: &SvmHyperparams, seed: u64) -> Result<GridResult, SvmError> {
    grid.validate()?;
    let assignment = stratified_folds(data, grid.folds, seed)?;
    let cells = first_error(
        grid.cells()
            .par_iter()
            .map(|&(c, gamma)| {
                let hp = SvmHyperparams { c, gamma, ..*base };
                cv_accuracy(data, &assignment, grid.folds, &hp).map(|acc| GridCell {
                    c,
                    gamma,
                    cv_accuracy: acc,
                })
            })
            .collect(),
    )?;
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

/// Stand-alone SVM on all rows.
pub fn train_single_svm(data: &Dataset, cfg: &RunConfig) -> Result<SvmModel> {
    let hp = match cfg.svm.search {
        Search::Fixed => cfg.svm_hyperparams(),
        Search::Grid | Search::PerMember => grid_search(data, &cfg.grid_spec(), &cfg.svm_hyperparams(), cfg.seed)?.best,
    };
    Ok(train_svm(data, &hp)?)
}

/// Builds the plan with a shared member grid search run in parallel.
fn plan(data: &Dataset, config: &EnsembleConfig) -> Result<EnsemblePlan, EnsembleError> {
    let mut config = config.clone();
    if let HyperparamChoice::Grid(grid) = &config.member_hp {
        if config.n_members == 0 {
            return Err(EnsembleError::InvalidConfig("n_members must be at least 1"));
        }
        let parts = partition(data, config.n_partitions(), config.seed)?;
        let best = grid_search(&parts[0], grid, &config.base, config.member_seed(0))
            .map_err(|source| EnsembleError::Member { index: 0, source })?
            .best;
        config.member_hp = HyperparamChoice::Fixed(best);
    }
    EnsemblePlan::new(data, &config)
}

fn train_members(plan: &EnsemblePlan, n: usize) -> Result<Vec<SvmModel>, EnsembleError> {
    first_error((0..n).into_par_iter().map(|i| plan.train_member(i)).collect())
}

/// Output layer over `members`, with its grid search run in parallel.
fn finish(plan: &EnsemblePlan, members: Vec<SvmModel>) -> Result<EnsembleModel, EnsembleError> {
    match &plan.config.meta_hp {
        HyperparamChoice::Grid(grid) | HyperparamChoice::PerMemberGrid(grid) => {
            let meta_data = plan.meta_dataset(&members)?;
            let seed = plan.config.meta_seed(members.len());
            let best = grid_search(&meta_data, grid, &plan.config.base, seed)
                .map_err(EnsembleError::Meta)?
                .best;
            let mut fixed = plan.clone();
            fixed.config.meta_hp = HyperparamChoice::Fixed(best);
            fixed.finish(members)
        }
        HyperparamChoice::Fixed(_) => plan.finish(members),
    }
}

/// Same model as `vad_core::ensemble::train_ensemble`, with members trained
/// concurrently.
pub fn train_ensemble(data: &Dataset, config: &EnsembleConfig) -> Result<EnsembleModel, EnsembleError> {
    let plan = plan(data, config)?;
    let members = train_members(&plan, config.n_members)?;
    finish(&plan, members)
}

/// Same rows as `vad_core::ensemble::sweep`.
pub fn sweep(data: &Dataset, test: &Dataset, config: &EnsembleConfig, n_max: usize) -> Result<Vec<SweepRow>, EnsembleError> {
    let config = EnsembleConfig {
        n_members: n_max,
        ..config.clone()
    };
    let plan = plan(data, &config)?;
    let members = train_members(&plan, n_max)?;
    let member_acc = first_error(
        members
            .par_iter()
            .map(|m| dataset_accuracy(test, |x| m.predict_label(x)))
            .collect(),
    )?;
    first_error(
        (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let ens = finish(&plan, members[..n].to_vec())?;
                let acc = dataset_accuracy(test, |x| ens.predict(x).map(|p| p.1))?;
                Ok(SweepRow {
                    n_members: n,
                    ensemble_accuracy: acc,
                    member_accuracies: member_acc[..n].to_vec(),
                })
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    Svm,
    Ensemble,
    Nn,
}

pub fn train(kind: ModelKind, data: &Dataset, cfg: &RunConfig) -> Result<Model> {
    Ok(match kind {
        ModelKind::Svm => Model::Svm(train_single_svm(data, cfg)?),
        ModelKind::Ensemble => Model::Ensemble(train_ensemble(data, &cfg.ensemble_config())?),
        ModelKind::Nn => Model::Mlp(train_mlp(data, &cfg.mlp_config())?),
    })
}

/// Speech probability per row; rows the gate marks silent score 0.
pub fn score_rows(model: &Model, ds: &LabeledDataset, gate: Option<&GateConfig>) -> Result<(Vec<f64>, Vec<bool>)> {
    if model.input_dim() != ds.data.dim() {
        return Err(SvmError::DimensionMismatch {
            expected: model.input_dim(),
            got: ds.data.dim(),
        }
        .into());
    }
    let silent: Vec<bool> = (0..ds.len())
        .map(|i| gate.is_some_and(|g| is_silent(&ds.vector(i), g)))
        .collect();
    let scores = first_error(
        (0..ds.len())
            .into_par_iter()
            .map(|i| if silent[i] { Ok(0.0) } else { model.score(ds.data.row(i)) })
            .collect(),
    )?;
    Ok((scores, silent))
}

/// Splits clips, not rows, into train and test: in each class a seeded
/// `fraction` of the clips (at least one when the class has two or more)
/// goes to the test side. Returns row indices of both sides.
pub fn clip_holdout(ds: &LabeledDataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Usage("hold-out fraction must lie in (0, 1)".into()));
    }
    let n_clips = ds.sources.len();
    let mut clip_label: Vec<Option<Label>> = vec![None; n_clips];
    for (i, p) in ds.provenance.iter().enumerate() {
        clip_label[p.clip_id as usize] = Some(ds.data.label(i));
    }
    let mut rng = vad_core::rng_from_seed(seed);
    let mut is_test = vec![false; n_clips];
    for class in [Label::Speech, Label::NonSpeech] {
        let mut ids: Vec<usize> = (0..n_clips).filter(|&c| clip_label[c] == Some(class)).collect();
        ids.shuffle(&mut rng);
        let mut take = (ids.len() as f64 * fraction).round() as usize;
        if ids.len() >= 2 {
            take = take.clamp(1, ids.len() - 1);
        } else {
            take = 0;
        }
        for &c in &ids[..take] {
            is_test[c] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| is_test[ds.provenance[i].clip_id as usize]);
    Ok((train, test))
}

fn clip_class(kind: ClipKind) -> ClipClass {
    match kind {
        ClipKind::Speech => ClipClass::Speech,
        ClipKind::Noise => ClipClass::Noise,
        ClipKind::Music => ClipClass::Music,
    }
}

/// Writes every clip of `spec` as 16-bit WAV into `dir` plus
/// `dir/manifest.csv` listing them by file name.
pub fn synth_to_dir(spec: &SynthSpec, dir: &Path) -> Result<Vec<(String, ClipClass)>> {
    spec.validate().map_err(|e| Error::Usage(format!("synth: {e}")))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = first_error(
        (0..spec.len())
            .into_par_iter()
            .map(|i| -> Result<(String, ClipClass)> {
                let clip = spec.generate(i);
                let file = format!("{}.wav", clip.name);
                save_wav(dir.join(&file), &clip.samples, spec.sample_rate, vad_core::audio::SampleFormat::Pcm16)?;
                Ok((file, clip_class(clip.kind)))
            })
            .collect(),
    )?;
    crate::manifest::write_manifest(dir.join("manifest.csv"), &rows)?;
    Ok(rows)
}
