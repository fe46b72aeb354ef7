use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vad::featfile::{read_features, write_features};
use vad::{FeatureFile, Model, ModelFile};
use vad_core::features::{LabeledDataset, Provenance};
use vad_core::nn::train_mlp;
use vad_core::{FeatureVector, Label};

const FAST: &str = r#"
[svm]
search = "fixed"
c = 1.0
gamma = 0.1

[ensemble]
member_search = "fixed"
meta_search = "fixed"
"#;

fn vad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vad")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vad(args);
    assert!(
        out.status.success(),
        "vad {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Corpus {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Corpus {
    /// Small synthetic corpus plus its feature file and a fast config.
    fn new(seed: u64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("fast.toml"), FAST).unwrap();
        let seed = seed.to_string();
        ok(&["synth", "--out", p(&root.join("wav")), "--seed", &seed, "--n-speech", "3", "--n-nonspeech", "3", "--clip-secs", "1"]);
        ok(&["extract", "--manifest", p(&root.join("wav/manifest.csv")), "--out", p(&root.join("feat.vadf"))]);
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

#[test]
fn help_and_version_succeed_and_bad_usage_exits_1() {
    assert_eq!(vad(&["--help"]).status.code(), Some(0));
    assert_eq!(vad(&["--version"]).status.code(), Some(0));
    assert_eq!(vad(&["train", "--help"]).status.code(), Some(0));
    assert_eq!(vad(&[]).status.code(), Some(1));
    assert_eq!(vad(&["extract", "--bogus"]).status.code(), Some(1));
    assert_eq!(vad(&["train", "--features", "x", "--out", "y", "--kind", "forest"]).status.code(), Some(1));
    assert_eq!(vad(&["synth", "--out", "/tmp/unused", "--threads", "0"]).status.code(), Some(1));
}

#[test]
fn missing_inputs_exit_2_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = vad(&["extract", "--manifest", "no/such/manifest.csv", "--out", p(&dir.path().join("f.vadf"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/manifest.csv"));

    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "path,label\nghost.wav,speech\n").unwrap();
    let out = vad(&["extract", "--manifest", p(&manifest), "--out", p(&dir.path().join("f.vadf"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost.wav"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a.wav,laughter\n").unwrap();
    assert_eq!(vad(&["extract", "--manifest", p(&bad), "--out", "x"]).status.code(), Some(2));
}

#[test]
fn synth_writes_manifest_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        ok(&["synth", "--out", p(dir.path()), "--seed", "5", "--n-speech", "10", "--n-nonspeech", "10", "--clip-secs", "0.5"]);
    }
    let manifest = std::fs::read_to_string(a.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 21);
    assert_eq!(manifest.lines().next(), Some("path,label"));
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 21);
    for name in names {
        assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn one_second_noise_file_gives_98_non_speech_rows_and_manifests_concatenate() {
    let c = Corpus::new(1);
    let noise = c.path("wav/noise-0003.wav");
    let wav = vad::wav::load_wav(&noise).unwrap();
    assert_eq!(wav.len(), 16000);
    std::fs::write(c.path("one.csv"), "path,label\nwav/noise-0003.wav,noise\n").unwrap();
    ok(&["extract", "--manifest", &c.s("one.csv"), "--out", &c.s("one.vadf")]);
    let one = read_features(c.path("one.vadf")).unwrap();
    assert_eq!(one.dataset.len(), 98);
    assert!(one.dataset.data.labels().iter().all(|&l| l == Label::NonSpeech));

    ok(&["extract", "--manifest", &c.s("one.csv"), "--manifest", &c.s("wav/manifest.csv"), "--out", &c.s("both.vadf")]);
    let all = read_features(c.path("feat.vadf")).unwrap();
    let both = read_features(c.path("both.vadf")).unwrap();
    assert_eq!(both.dataset.len(), one.dataset.len() + all.dataset.len());
    assert_eq!(both.dataset.sources.len(), 7);
}

#[test]
fn ensemble_model_round_trips_bit_exactly() {
    let c = Corpus::new(2);
    let feats = read_features(c.path("feat.vadf")).unwrap();
    assert!(feats.dataset.len() >= 580);
    ok(&["train", "--features", &c.s("feat.vadf"), "--config", &c.s("fast.toml"), "--n-members", "3", "--seed", "4", "--out", &c.s("ens.json")]);
    let text = std::fs::read_to_string(c.path("ens.json")).unwrap();
    let loaded = ModelFile::load(c.path("ens.json")).unwrap();
    assert_eq!(loaded.to_json(), text);
    assert_eq!(loaded.seed, 4);
    assert_eq!(loaded.config.ensemble.n_members, 3);
    match &loaded.model {
        Model::Ensemble(e) => {
            assert_eq!(e.n_members(), 3);
            assert_eq!(e.meta.dim(), 3);
        }
        other => panic!("expected an ensemble, got {}", other.kind()),
    }
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["version", "n_members", "seed", "members", "meta", "layers"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    for key in ["version", "gamma", "C", "bias", "platt_a", "platt_b", "scaler", "support_vectors", "dual_coeffs"] {
        assert!(json["meta"].get(key).is_some(), "meta missing {key}");
    }
    ok(&["eval", "--model", &c.s("ens.json"), "--features", &c.s("feat.vadf"), "--report", &c.s("r.json")]);
}

#[test]
fn nn_training_uses_configured_epochs() {
    let c = Corpus::new(3);
    std::fs::write(c.path("nn.toml"), "seed = 8\n[mlp]\nepochs = 3\n").unwrap();
    ok(&["train", "--kind", "nn", "--features", &c.s("feat.vadf"), "--config", &c.s("nn.toml"), "--out", &c.s("nn.json")]);
    let loaded = ModelFile::load(c.path("nn.json")).unwrap();
    assert_eq!(loaded.config.mlp.epochs, 3);

    let feats = read_features(c.path("feat.vadf")).unwrap();
    let gate = vad_core::GateConfig {
        energy_threshold: loaded.gate_threshold.unwrap(),
    };
    let rows = vad::pipeline::gated_rows(&feats.dataset, Some(&gate));
    let expected = train_mlp(&feats.dataset.data.subset(&rows), &loaded.config.mlp_config()).unwrap();
    match loaded.model {
        Model::Mlp(m) => {
            assert_eq!(m.weights, expected.weights);
            assert_eq!(m.biases, expected.biases);
        }
        other => panic!("expected nn, got {}", other.kind()),
    }
}

fn separable_features(path: &Path, single_class: bool) {
    let mut ds = LabeledDataset::default();
    ds.sources = vec!["pos".into(), "neg".into()];
    for i in 0..200u32 {
        let label = if single_class || i % 2 == 0 { Label::Speech } else { Label::NonSpeech };
        let mut v = [0.0; 13];
        for (k, x) in v.iter_mut().enumerate() {
            *x = label.sign() * 3.0 + ((i as usize * 31 + k * 17) % 23) as f64 / 23.0;
        }
        let clip_id = if label == Label::Speech { 0 } else { 1 };
        ds.push(&FeatureVector(v), label, Provenance { clip_id, frame_index: i });
    }
    write_features(path, &FeatureFile { dataset: ds, meta: None }).unwrap();
}

#[test]
fn eval_on_separable_training_set_and_single_class_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    std::fs::write(dir.path().join("fast.toml"), FAST).unwrap();
    separable_features(&dir.path().join("sep.vadf"), false);
    ok(&["train", "--kind", "svm", "--features", &d("sep.vadf"), "--config", &d("fast.toml"), "--out", &d("svm.json")]);
    ok(&["eval", "--model", &d("svm.json"), "--features", &d("sep.vadf"), "--report", &d("r.json"), "--out", &d("roc.csv")]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report["all_frames"]["accuracy"].as_f64().unwrap() >= 0.95);
    for key in ["accuracy", "tp", "fp", "tn", "fn", "tpr", "fpr", "auc", "frames"] {
        assert!(report["all_frames"].get(key).is_some(), "missing {key}");
    }
    assert!(report["gate_threshold"].is_null());
    assert_eq!(report["model_kind"], "svm");
    let roc = std::fs::read_to_string(dir.path().join("roc.csv")).unwrap();
    assert_eq!(roc.lines().next(), Some("fpr,tpr"));
    assert_eq!(roc.lines().nth(1), Some("0,0"));
    assert_eq!(roc.lines().last(), Some("1,1"));

    separable_features(&dir.path().join("one.vadf"), true);
    let out = vad(&["eval", "--model", &d("svm.json"), "--features", &d("one.vadf"), "--report", &d("r2.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("both classes"));
}

#[test]
fn threshold_precedence_flag_then_model_then_features() {
    let c = Corpus::new(4);
    let feats = read_features(c.path("feat.vadf")).unwrap();
    let from_file = feats.meta.unwrap().gate_threshold.unwrap();
    ok(&["train", "--kind", "svm", "--features", &c.s("feat.vadf"), "--config", &c.s("fast.toml"), "--threshold", "-20.5", "--out", &c.s("m.json")]);
    assert_eq!(ModelFile::load(c.path("m.json")).unwrap().gate_threshold, Some(-20.5));

    let report = |extra: &[&str]| -> serde_json::Value {
        let (model, feats, out) = (c.s("m.json"), c.s("feat.vadf"), c.s("r.json"));
        let mut args = vec!["eval", "--model", &model, "--features", &feats, "--report", &out];
        args.extend_from_slice(extra);
        ok(&args);
        serde_json::from_str(&std::fs::read_to_string(c.path("r.json")).unwrap()).unwrap()
    };
    assert_eq!(report(&[])["gate_threshold"], -20.5);
    assert_eq!(report(&["--threshold", "-30"])["gate_threshold"], -30.0);
    assert!(report(&["--keep-silent"])["gate_threshold"].is_null());

    ok(&["train", "--kind", "svm", "--features", &c.s("feat.vadf"), "--config", &c.s("fast.toml"), "--out", &c.s("m2.json")]);
    assert_eq!(ModelFile::load(c.path("m2.json")).unwrap().gate_threshold, Some(from_file));
}

#[test]
fn sweep_writes_one_row_per_ensemble_size() {
    let c = Corpus::new(5);
    ok(&["sweep", "--features", &c.s("feat.vadf"), "--config", &c.s("fast.toml"), "--n-members", "1", "--out", &c.s("s1.csv")]);
    assert_eq!(std::fs::read_to_string(c.path("s1.csv")).unwrap().lines().count(), 2);
    ok(&["sweep", "--features", &c.s("feat.vadf"), "--config", &c.s("fast.toml"), "--n-members", "3", "--out", &c.s("s3.csv"), "--report", &c.s("s3.json")]);
    let csv = std::fs::read_to_string(c.path("s3.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("n,ensemble_accuracy,mean_member_accuracy"));
    assert_eq!(lines[3].split(',').last().unwrap().split(';').count(), 3);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(c.path("s3.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn grid_search_lists_every_cell() {
    let c = Corpus::new(6);
    std::fs::write(c.path("grid.toml"), "[grid]\nc_values = [0.5, 8.0]\ngamma_values = [0.03125, 0.5, 2.0]\n").unwrap();
    let out = ok(&["grid-search", "--features", &c.s("feat.vadf"), "--config", &c.s("grid.toml"), "--out", &c.s("g.csv")]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("best C="));
    let csv = std::fs::read_to_string(c.path("g.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(csv.lines().next(), Some("C,gamma,cv_accuracy"));
}

#[test]
fn iteration_cap_exits_3() {
    let c = Corpus::new(7);
    std::fs::write(c.path("cap.toml"), "[svm]\nsearch = \"fixed\"\nmax_iter = 1\n").unwrap();
    let out = vad(&["train", "--kind", "svm", "--features", &c.s("feat.vadf"), "--config", &c.s("cap.toml"), "--out", &c.s("m.json")]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!c.path("m.json").exists());
}
