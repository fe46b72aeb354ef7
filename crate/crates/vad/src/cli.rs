//! The `vad` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use vad_core::{Dataset, GateConfig};

use crate::config::RunConfig;
use crate::error::{Error, Result, EXIT_USAGE};
use crate::featfile::{read_features, write_features, FeatureFile};
use crate::manifest::read_manifest;
use crate::model_io::ModelFile;
use crate::pipeline::{self, ModelKind};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "vad", version, about = "Frame-level voice activity detection with a stacked SVM ensemble")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed, recorded in every artifact.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Outputs are identical for any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract MFCC features from the WAV files listed in manifests.
    Extract(ExtractArgs),
    /// Train an SVM, an ensemble or the MLP baseline.
    Train(TrainArgs),
    /// Accuracy of ensembles with 1..=n members sharing one partition.
    Sweep(SweepArgs),
    /// Score a feature file and write a JSON report and ROC CSV.
    Eval(EvalArgs),
    /// Generate a synthetic speech / noise / music corpus.
    Synth(SynthArgs),
    /// Cross-validated (C, gamma) grid search.
    GridSearch(GridArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// `path,label` CSV; repeat to concatenate several.
    #[arg(long, required = true)]
    pub manifest: Vec<PathBuf>,
    /// Output feature file.
    #[arg(long)]
    pub out: PathBuf,
    /// Fixed gate threshold instead of the speech-energy percentile.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Omit gate-silent speech frames from the file.
    #[arg(long)]
    pub drop_silent: bool,
}

/// Gate options shared by commands that read feature files.
#[derive(Debug, Args)]
pub struct GateArgs {
    /// Gate threshold; overrides the model's and the feature file's.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Do not apply the silence gate.
    #[arg(long)]
    pub keep_silent: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum, default_value = "ensemble")]
    pub kind: ModelKind,
    /// Output model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n_members: Option<usize>,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Test feature file; without it a seeded share of the clips is held out.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Share of clips per class held out when `--test` is absent.
    #[arg(long, default_value_t = 0.25)]
    pub holdout: f64,
    /// Largest ensemble size.
    #[arg(long)]
    pub n_members: Option<usize>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON copy of the rows with seed and config.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Output report (JSON).
    #[arg(long)]
    pub report: PathBuf,
    /// Output ROC curve (CSV with `fpr,tpr` rows).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for the WAV files and `manifest.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n_speech: Option<usize>,
    #[arg(long)]
    pub n_nonspeech: Option<usize>,
    #[arg(long)]
    pub clip_secs: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Output CSV of every grid cell.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gate: GateArgs,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Extract(a) => extract(a, cfg),
        Command::Train(a) => train(a, cfg),
        Command::Sweep(a) => sweep(a, cfg),
        Command::Eval(a) => eval(a, cfg),
        Command::Synth(a) => synth(a, cfg),
        Command::GridSearch(a) => grid_search(a, cfg),
    })
}

fn extract(a: ExtractArgs, mut cfg: RunConfig) -> Result<()> {
    if a.threshold.is_some() {
        cfg.gate.threshold = a.threshold;
    }
    let mut entries = Vec::new();
    for m in &a.manifest {
        entries.extend(read_manifest(m)?);
    }
    let file = pipeline::extract(&entries, &cfg, a.drop_silent)?;
    write_features(&a.out, &file)?;
    let (speech, non_speech) = file.dataset.data.class_counts();
    println!(
        "{} clips, {} rows (speech {speech}, non-speech {non_speech}), gate threshold {}",
        entries.len(),
        file.dataset.len(),
        file.meta.as_ref().and_then(|m| m.gate_threshold).map_or("none".into(), |t| t.to_string()),
    );
    Ok(())
}

/// Applies the gate flag to the config and picks the threshold: flag or
/// config first, then `fallbacks` in order.
fn resolve_gate(gate: &GateArgs, cfg: &mut RunConfig, fallbacks: &[Option<f64>]) -> Option<GateConfig> {
    if gate.threshold.is_some() {
        cfg.gate.threshold = gate.threshold;
    }
    if gate.keep_silent {
        return None;
    }
    std::iter::once(cfg.gate.threshold)
        .chain(fallbacks.iter().copied())
        .flatten()
        .next()
        .map(|t| GateConfig { energy_threshold: t })
}

fn file_threshold(file: &FeatureFile) -> Option<f64> {
    file.meta.as_ref().and_then(|m| m.gate_threshold)
}

fn gated_dataset(file: &FeatureFile, gate: Option<&GateConfig>) -> Dataset {
    file.dataset.data.subset(&pipeline::gated_rows(&file.dataset, gate))
}

fn require_rows(data: &Dataset, what: &Path) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data(format!("{}: no rows left after gating", what.display())));
    }
    Ok(())
}

fn train(a: TrainArgs, mut cfg: RunConfig) -> Result<()> {
    if let Some(n) = a.n_members {
        cfg.ensemble.n_members = n;
    }
    let file = read_features(&a.features)?;
    let gate = resolve_gate(&a.gate, &mut cfg, &[file_threshold(&file)]);
    let data = gated_dataset(&file, gate.as_ref());
    require_rows(&data, &a.features)?;
    let model = pipeline::train(a.kind, &data, &cfg)?;
    let out = ModelFile {
        model,
        seed: cfg.seed,
        gate_threshold: gate.map(|g| g.energy_threshold),
        config: cfg,
    };
    out.save(&a.out)?;
    let (speech, non_speech) = data.class_counts();
    println!(
        "trained {} on {} rows (speech {speech}, non-speech {non_speech}); wrote {}",
        out.model.kind(),
        data.len(),
        a.out.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct SweepJson {
    version: u32,
    seed: u64,
    gate_threshold: Option<f64>,
    train_rows: usize,
    test_rows: usize,
    rows: Vec<SweepRowJson>,
    config: RunConfig,
}

#[derive(serde::Serialize)]
struct SweepRowJson {
    n: usize,
    ensemble_accuracy: f64,
    member_accuracies: Vec<f64>,
}

fn sweep(a: SweepArgs, mut cfg: RunConfig) -> Result<()> {
    if let Some(n) = a.n_members {
        cfg.ensemble.n_members = n;
    }
    let n_max = cfg.ensemble.n_members;
    let file = read_features(&a.features)?;
    let gate = resolve_gate(&a.gate, &mut cfg, &[file_threshold(&file)]);
    let (train, test) = match &a.test {
        Some(path) => {
            let test_file = read_features(path)?;
            (gated_dataset(&file, gate.as_ref()), gated_dataset(&test_file, gate.as_ref()))
        }
        None => {
            let (train_idx, test_idx) = pipeline::clip_holdout(&file.dataset, a.holdout, cfg.seed)?;
            let keep = pipeline::gated_rows(&file.dataset, gate.as_ref());
            let mut keep_mask = vec![false; file.dataset.len()];
            for i in keep {
                keep_mask[i] = true;
            }
            let pick = |idx: Vec<usize>| -> Vec<usize> { idx.into_iter().filter(|&i| keep_mask[i]).collect() };
            (file.dataset.data.subset(&pick(train_idx)), file.dataset.data.subset(&pick(test_idx)))
        }
    };
    require_rows(&train, &a.features)?;
    require_rows(&test, a.test.as_deref().unwrap_or(&a.features))?;
    let rows = pipeline::sweep(&train, &test, &cfg.ensemble_config(), n_max)?;
    report::write_csv(&a.out, report::sweep_csv(&rows))?;
    if let Some(path) = &a.report {
        report::write_json(
            path,
            &SweepJson {
                version: report::REPORT_VERSION,
                seed: cfg.seed,
                gate_threshold: gate.map(|g| g.energy_threshold),
                train_rows: train.len(),
                test_rows: test.len(),
                rows: rows
                    .iter()
                    .map(|r| SweepRowJson {
                        n: r.n_members,
                        ensemble_accuracy: r.ensemble_accuracy,
                        member_accuracies: r.member_accuracies.clone(),
                    })
                    .collect(),
                config: cfg.clone(),
            },
        )?;
    }
    for r in &rows {
        println!("n={} ensemble {:.4} mean member {:.4}", r.n_members, r.ensemble_accuracy, r.mean_member_accuracy());
    }
    Ok(())
}

fn eval(a: EvalArgs, mut cfg: RunConfig) -> Result<()> {
    let model = ModelFile::load(&a.model)?;
    let file = read_features(&a.features)?;
    let gate = resolve_gate(&a.gate, &mut cfg, &[model.gate_threshold, file_threshold(&file)]);
    let (scores, silent) = pipeline::score_rows(&model.model, &file.dataset, gate.as_ref())?;
    let evaluation = report::build_evaluation(
        &scores,
        &silent,
        file.dataset.data.labels(),
        model.model.kind(),
        model.seed,
        gate.map(|g| g.energy_threshold),
        &model.config,
    )?;
    report::write_json(&a.report, &evaluation.json)?;
    if let Some(path) = &a.out {
        report::write_csv(path, report::roc_csv(&evaluation.roc))?;
    }
    let m = &evaluation.json.all_frames;
    println!(
        "{} frames ({} silent): accuracy {:.4}, AUC {:.4}, TPR {:.4}, FPR {:.4}",
        m.frames, evaluation.json.silent_frames, m.accuracy, m.auc, m.tpr, m.fpr
    );
    if let Some(c) = &evaluation.json.classified_only {
        println!("classified frames only: accuracy {:.4}, AUC {:.4}", c.accuracy, c.auc);
    }
    Ok(())
}

fn synth(a: SynthArgs, mut cfg: RunConfig) -> Result<()> {
    if let Some(n) = a.n_speech {
        cfg.synth.n_speech = n;
    }
    if let Some(n) = a.n_nonspeech {
        cfg.synth.n_nonspeech = n;
    }
    if let Some(s) = a.clip_secs {
        cfg.synth.clip_secs = s;
    }
    if let Some(r) = a.sample_rate {
        cfg.synth.sample_rate = r;
    }
    let rows = pipeline::synth_to_dir(&cfg.synth_spec(), &a.out)?;
    println!("wrote {} clips and {}", rows.len(), a.out.join("manifest.csv").display());
    Ok(())
}

fn grid_search(a: GridArgs, mut cfg: RunConfig) -> Result<()> {
    let file = read_features(&a.features)?;
    let gate = resolve_gate(&a.gate, &mut cfg, &[file_threshold(&file)]);
    let data = gated_dataset(&file, gate.as_ref());
    require_rows(&data, &a.features)?;
    let result = pipeline::grid_search(&data, &cfg.grid_spec(), &cfg.svm_hyperparams(), cfg.seed)?;
    if let Some(path) = &a.out {
        report::write_csv(path, report::grid_csv(&result.cells))?;
    }
    println!("best C={} gamma={} cv accuracy {:.4}", result.best.c, result.best.gamma, result.cv_accuracy);
    Ok(())
}
