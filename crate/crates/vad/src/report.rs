//! Evaluation reports and plot-ready CSV output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vad_core::dataset::Label;
use vad_core::ensemble::SweepRow;
use vad_core::eval::evaluate;
use vad_core::svm::GridCell;
use vad_core::EvalReport;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// Metrics over one set of frames at the 0.5 decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub frames: usize,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub auc: f64,
}

impl Metrics {
    pub fn from_report(r: &EvalReport) -> Self {
        Self {
            frames: r.confusion.total(),
            accuracy: r.accuracy,
            tp: r.confusion.tp,
            fp: r.confusion.fp,
            tn: r.confusion.tn,
            fn_: r.confusion.fn_,
            tpr: r.tpr,
            fpr: r.fpr,
            auc: r.auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalJson {
    pub version: u32,
    pub model_kind: String,
    pub seed: u64,
    pub gate_threshold: Option<f64>,
    pub decision_threshold: f64,
    pub silent_frames: usize,
    /// Every frame; gate-silent frames count as predicted non-speech.
    pub all_frames: Metrics,
    /// Only frames the gate passed to the classifier; absent when they do
    /// not contain both classes.
    pub classified_only: Option<Metrics>,
    pub config: RunConfig,
}

pub const DECISION_THRESHOLD: f64 = 0.5;

/// Full report plus the all-frames ROC curve.
pub struct Evaluation {
    pub json: EvalJson,
    pub roc: Vec<(f64, f64)>,
}

pub fn build_evaluation(
    scores: &[f64],
    silent: &[bool],
    labels: &[Label],
    model_kind: &str,
    seed: u64,
    gate_threshold: Option<f64>,
    config: &RunConfig,
) -> Result<Evaluation> {
    let all = evaluate(scores, labels, DECISION_THRESHOLD)?;
    let kept: Vec<usize> = (0..scores.len()).filter(|&i| !silent[i]).collect();
    let kept_scores: Vec<f64> = kept.iter().map(|&i| scores[i]).collect();
    let kept_labels: Vec<Label> = kept.iter().map(|&i| labels[i]).collect();
    let classified_only = evaluate(&kept_scores, &kept_labels, DECISION_THRESHOLD)
        .ok()
        .map(|r| Metrics::from_report(&r));
    Ok(Evaluation {
        json: EvalJson {
            version: REPORT_VERSION,
            model_kind: model_kind.to_string(),
            seed,
            gate_threshold,
            decision_threshold: DECISION_THRESHOLD,
            silent_frames: silent.iter().filter(|&&s| s).count(),
            all_frames: Metrics::from_report(&all),
            classified_only,
            config: config.clone(),
        },
        roc: all.roc,
    })
}

fn write_text(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path.as_ref(), text)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn roc_csv(roc: &[(f64, f64)]) -> String {
    csv_text(&["fpr", "tpr"], roc.iter().map(|&(f, t)| vec![f.to_string(), t.to_string()]))
}

/// One row per ensemble size; member accuracies are `;`-joined.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_text(
        &["n", "ensemble_accuracy", "mean_member_accuracy", "min_member_accuracy", "max_member_accuracy", "member_accuracies"],
        rows.iter().map(|r| {
            let min = r.member_accuracies.iter().copied().fold(f64::INFINITY, f64::min);
            let max = r.member_accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let members: Vec<String> = r.member_accuracies.iter().map(f64::to_string).collect();
            vec![
                r.n_members.to_string(),
                r.ensemble_accuracy.to_string(),
                r.mean_member_accuracy().to_string(),
                min.to_string(),
                max.to_string(),
                members.join(";"),
            ]
        }),
    )
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    csv_text(
        &["C", "gamma", "cv_accuracy"],
        cells.iter().map(|c| vec![c.c.to_string(), c.gamma.to_string(), c.cv_accuracy.to_string()]),
    )
}

pub fn write_csv(path: impl AsRef<Path>, text: String) -> Result<()> {
    write_text(path.as_ref(), text)
}
