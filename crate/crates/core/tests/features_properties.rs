use proptest::prelude::*;
use rand::Rng;
use vad_core::features::{clip_features, mel_filterbank, ClipFeatures, LabeledDataset, Mfcc};
use vad_core::{AudioClip, FeatureVector, FrameSpec, GateConfig, Label, MfccConfig, N_MFCC};

fn noise(seed: u64, n: usize, amp: f64) -> Vec<f64> {
    let mut rng = vad_core::rng_from_seed(seed);
    (0..n).map(|_| rng.random_range(-amp..amp)).collect()
}

proptest! {
    #[test]
    fn filterbank_is_triangular_overlapping_and_covering(
        rate in prop::sample::select(vec![8000u32, 16000, 22050, 44100]),
        n_filters in 10usize..=40,
        fft_pow in 9u32..=11,
    ) {
        let fft_size = 1usize << fft_pow;
        let filters = mel_filterbank(n_filters, fft_size, rate, 0.0, rate as f64 / 2.0);
        let n_bins = fft_size / 2 + 1;
        for (i, f) in filters.iter().enumerate() {
            prop_assert_eq!(f.len(), n_bins);
            prop_assert!(f.iter().all(|&w| w >= 0.0));
            let peak = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            prop_assert!(f[..=peak].windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f[peak..].windows(2).all(|w| w[0] >= w[1]));
            if i + 1 < filters.len() {
                prop_assert!(f.iter().zip(&filters[i + 1]).any(|(a, b)| *a > 0.0 && *b > 0.0));
            }
        }
        for b in 1..n_bins - 1 {
            prop_assert!(filters.iter().map(|f| f[b]).sum::<f64>() > 0.0, "bin {} uncovered", b);
        }
    }

    #[test]
    fn gain_moves_only_the_energy_coefficient(seed in any::<u64>(), amp in 0.05f64..1.0, g in 0.2f64..5.0) {
        let cfg = MfccConfig { log_floor: f64::MIN_POSITIVE, ..MfccConfig::default() };
        let m = Mfcc::new(&cfg, 400, 16000).unwrap();
        let x = noise(seed, 400, amp);
        let scaled: Vec<f64> = x.iter().map(|v| v * g).collect();
        let (a, b) = (m.coefficients(&x), m.coefficients(&scaled));
        let n = cfg.n_filters as f64;
        let shift = 2.0 * g.ln() * n * (1.0 / n).sqrt();
        prop_assert!((b[0] - a[0] - shift).abs() <= 1e-9);
        for k in 1..N_MFCC {
            prop_assert!((b[k] - a[k]).abs() <= 1e-9);
        }
    }

    #[test]
    fn sign_flip_leaves_coefficients_unchanged(seed in any::<u64>(), amp in 0.01f64..1.0) {
        let m = Mfcc::new(&MfccConfig::default(), 400, 16000).unwrap();
        let x = noise(seed, 400, amp);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(m.coefficients(&x), m.coefficients(&neg));
    }
}

#[test]
fn extraction_rows_follow_clip_then_frame_order() {
    let spec = FrameSpec::default();
    let cfg = MfccConfig::default();
    let clips: Vec<ClipFeatures> = [(Label::Speech, 0.5, 1), (Label::NonSpeech, 0.2, 2), (Label::Speech, 0.001, 3)]
        .iter()
        .map(|&(label, amp, seed)| {
            let audio = AudioClip::new(noise(seed, 4000, amp), 16000, format!("clip{seed}.wav"));
            ClipFeatures {
                source_path: audio.source_path.clone(),
                label,
                vectors: clip_features(&audio, &spec, &cfg).unwrap(),
            }
        })
        .collect();
    let per_clip = spec.frame_count(4000, 16000);
    let all = LabeledDataset::from_clips(&clips, None, false);
    assert_eq!(all.len(), 3 * per_clip);
    for (i, p) in all.provenance.iter().enumerate() {
        assert_eq!((p.clip_id as usize, p.frame_index as usize), (i / per_clip, i % per_clip));
        assert_eq!(all.vector(i), clips[i / per_clip].vectors[i % per_clip]);
    }

    // A gate between the quiet and loud clips drops only the quiet speech.
    let quiet = clips[2].vectors.iter().map(FeatureVector::energy).fold(f64::NEG_INFINITY, f64::max);
    let loud = clips[0].vectors.iter().map(FeatureVector::energy).fold(f64::INFINITY, f64::min);
    assert!(quiet < loud);
    let gate = GateConfig {
        energy_threshold: (quiet + loud) / 2.0,
    };
    let gated = LabeledDataset::from_clips(&clips, Some(&gate), true);
    assert_eq!(gated.len(), 2 * per_clip);
    assert!(gated.provenance.iter().all(|p| p.clip_id != 2));
}
