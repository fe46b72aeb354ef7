//! MFCC extraction, the log-mel energy silence gate, and frame-level
//! datasets built from clips.
//!
//! The pipeline per frame is pre-emphasis, Hamming window, zero-padded
//! power spectrum, a triangular mel filterbank, natural log with a small
//! floor, and an orthonormal DCT-II. Coefficient 0 is the DC term of the log
//! filterbank energies and doubles as the gate statistic.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::audio::{frame_clip, AudioClip, Frame, FrameSpec};
use crate::dataset::{Dataset, Label};
use crate::fft::Fft;
use crate::math;

/// Number of cepstral coefficients per frame.
pub const N_MFCC: usize = 13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("invalid MFCC config: {0}")]
    InvalidConfig(&'static str),
    #[error("feature vector must have {N_MFCC} finite values")]
    BadVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub n_coeffs: usize,
    pub n_filters: usize,
    /// `None` picks the smallest power of two not below the frame length.
    pub fft_size: Option<usize>,
    pub preemphasis: f64,
    pub mel_low_hz: f64,
    /// `None` means the Nyquist frequency.
    pub mel_high_hz: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            n_coeffs: N_MFCC,
            n_filters: 26,
            fft_size: None,
            preemphasis: 0.97,
            mel_low_hz: 0.0,
            mel_high_hz: None,
            log_floor: 1e-10,
        }
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * math::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (math::powf(10.0, mel / 2595.0) - 1.0)
}

/// Hamming window of length `n` (symmetric).
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * math::cos(2.0 * PI * i as f64 / (n - 1) as f64))
        .collect()
}

/// Orthonormal DCT-II basis, `rows x n`. Row `k` is
/// `s_k cos(pi k (2j + 1) / 2n)` with `s_0 = sqrt(1/n)`, `s_k = sqrt(2/n)`.
pub fn dct_matrix(rows: usize, n: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|k| {
            let scale = if k == 0 {
                math::sqrt(1.0 / n as f64)
            } else {
                math::sqrt(2.0 / n as f64)
            };
            (0..n)
                .map(|j| scale * math::cos(PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64))
                .collect()
        })
        .collect()
}

/// Triangular filters over the one-sided spectrum (`fft_size / 2 + 1` bins).
///
/// Filter edges are equally spaced on the mel scale; weights are evaluated at
/// each bin's exact frequency so narrow low-frequency filters never vanish.
pub fn mel_filterbank(n_filters: usize, fft_size: usize, rate: u32, low_hz: f64, high_hz: f64) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    let mel_lo = hz_to_mel(low_hz);
    let mel_hi = hz_to_mel(high_hz);
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_filters + 1) as f64))
        .collect();
    let bin_hz = rate as f64 / fft_size as f64;
    (0..n_filters)
        .map(|m| {
            let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .map(|b| {
                    let f = b as f64 * bin_hz;
                    if f > left && f < center {
                        (f - left) / (center - left)
                    } else if f >= center && f < right {
                        (right - f) / (right - center)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// A planned MFCC extractor for one frame length and sample rate.
#[derive(Debug, Clone)]
pub struct Mfcc {
    cfg: MfccConfig,
    frame_len: usize,
    window: Vec<f64>,
    fft: Fft,
    filters: Vec<Vec<f64>>,
    dct: Vec<Vec<f64>>,
}

impl Mfcc {
    pub fn new(cfg: &MfccConfig, frame_len: usize, rate: u32) -> Result<Self, FeatureError> {
        if frame_len == 0 {
            return Err(FeatureError::InvalidConfig("frame length must be at least 1"));
        }
        if cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_filters {
            return Err(FeatureError::InvalidConfig("need 1 <= n_coeffs <= n_filters"));
        }
        if !(0.0..1.0).contains(&cfg.preemphasis) {
            return Err(FeatureError::InvalidConfig("preemphasis must lie in [0, 1)"));
        }
        if !(cfg.log_floor > 0.0) {
            return Err(FeatureError::InvalidConfig("log_floor must be positive"));
        }
        let fft_size = cfg.fft_size.unwrap_or_else(|| frame_len.next_power_of_two());
        if fft_size < frame_len {
            return Err(FeatureError::InvalidConfig("fft_size is smaller than the frame length"));
        }
        let fft = Fft::new(fft_size).ok_or(FeatureError::InvalidConfig("fft_size must be a power of two"))?;
        let nyquist = rate as f64 / 2.0;
        let high = cfg.mel_high_hz.unwrap_or(nyquist);
        if !(cfg.mel_low_hz >= 0.0 && cfg.mel_low_hz < high && high <= nyquist) {
            return Err(FeatureError::InvalidConfig("need 0 <= mel_low_hz < mel_high_hz <= rate/2"));
        }
        Ok(Self {
            cfg: cfg.clone(),
            frame_len,
            window: hamming(frame_len),
            filters: mel_filterbank(cfg.n_filters, fft_size, rate, cfg.mel_low_hz, high),
            dct: dct_matrix(cfg.n_coeffs, cfg.n_filters),
            fft,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn fft_size(&self) -> usize {
        self.fft.size()
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    /// Natural-log mel filterbank energies of one frame.
    pub fn log_mel_energies(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.frame_len, "frame length differs from the planned length");
        let alpha = self.cfg.preemphasis;
        let shaped: Vec<f64> = (0..samples.len())
            .map(|t| {
                let y = if t == 0 { samples[0] } else { samples[t] - alpha * samples[t - 1] };
                y * self.window[t]
            })
            .collect();
        let power = self.fft.power_spectrum(&shaped);
        self.filters
            .iter()
            .map(|w| {
                let energy: f64 = w.iter().zip(&power).map(|(a, b)| a * b).sum();
                math::ln(energy + self.cfg.log_floor)
            })
            .collect()
    }

    /// The first `n_coeffs` cepstral coefficients of one frame.
    pub fn coefficients(&self, samples: &[f64]) -> Vec<f64> {
        let logs = self.log_mel_energies(samples);
        self.dct
            .iter()
            .map(|row| row.iter().zip(&logs).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn feature_vector(&self, samples: &[f64]) -> Result<FeatureVector, FeatureError> {
        FeatureVector::from_slice(&self.coefficients(samples))
    }
}

/// One-shot MFCC of a frame. Plans a fresh extractor, so prefer [`Mfcc`] for
/// many frames.
pub fn mfcc(frame: &Frame<'_>, rate: u32, cfg: &MfccConfig) -> Result<FeatureVector, FeatureError> {
    Mfcc::new(cfg, frame.samples.len(), rate)?.feature_vector(frame.samples)
}

/// Thirteen cepstral coefficients; `coeffs[0]` is the log-mel energy term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_MFCC]);

impl FeatureVector {
    pub fn from_slice(values: &[f64]) -> Result<Self, FeatureError> {
        if values.len() != N_MFCC || values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::BadVector);
        }
        let mut out = [0.0; N_MFCC];
        out.copy_from_slice(values);
        Ok(Self(out))
    }

    #[inline]
    pub fn energy(&self) -> f64 {
        self.0[0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig {
    pub energy_threshold: f64,
}

/// True iff the log-mel energy is strictly below the threshold.
#[inline]
pub fn is_silent(fv: &FeatureVector, gate: &GateConfig) -> bool {
    fv.energy() < gate.energy_threshold
}

/// Linear-interpolated percentile (`q` in `[0, 100]`) of unsorted values.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (q.clamp(0.0, 100.0) / 100.0) * (sorted.len() - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Default gate threshold: this percentile of speech-frame energies.
pub const DEFAULT_GATE_PERCENTILE: f64 = 5.0;

/// Where a row came from: clip ordinal within the manifest and frame index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub clip_id: u32,
    pub frame_index: u32,
}

/// Frame features of one clip, before gating.
#[derive(Debug, Clone)]
pub struct ClipFeatures {
    pub source_path: String,
    pub label: Label,
    pub vectors: Vec<FeatureVector>,
}

/// Extracts MFCC vectors for every frame of `clip`.
pub fn clip_features(clip: &AudioClip, spec: &FrameSpec, cfg: &MfccConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    let frame_len = spec.frame_len(clip.sample_rate_hz);
    let frames = frame_clip(clip, spec);
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let extractor = Mfcc::new(cfg, frame_len, clip.sample_rate_hz)?;
    frames.iter().map(|f| extractor.feature_vector(f.samples)).collect()
}

/// Frame-level MFCC rows with labels and per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    pub provenance: Vec<Provenance>,
    /// Indexed by `Provenance::clip_id`.
    pub sources: Vec<String>,
}

impl Default for LabeledDataset {
    fn default() -> Self {
        Self {
            data: Dataset::new(N_MFCC),
            provenance: Vec::new(),
            sources: Vec::new(),
        }
    }
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> FeatureVector {
        let mut out = [0.0; N_MFCC];
        out.copy_from_slice(self.data.row(i));
        FeatureVector(out)
    }

    pub fn push(&mut self, fv: &FeatureVector, label: Label, provenance: Provenance) {
        self.data.push(fv.as_slice(), label);
        self.provenance.push(provenance);
    }

    /// Assembles clips in order. With `drop_silent`, speech frames failing the
    /// gate are omitted; non-speech frames are always kept.
    pub fn from_clips(clips: &[ClipFeatures], gate: Option<&GateConfig>, drop_silent: bool) -> Self {
        let mut ds = Self::default();
        for (clip_id, clip) in clips.iter().enumerate() {
            ds.sources.push(clip.source_path.clone());
            for (frame_index, fv) in clip.vectors.iter().enumerate() {
                let silent = gate.is_some_and(|g| is_silent(fv, g));
                if drop_silent && silent && clip.label == Label::Speech {
                    continue;
                }
                ds.push(
                    fv,
                    clip.label,
                    Provenance {
                        clip_id: clip_id as u32,
                        frame_index: frame_index as u32,
                    },
                );
            }
        }
        ds
    }

    /// Appends another dataset, offsetting its clip ids.
    pub fn append(&mut self, other: &LabeledDataset) {
        let offset = self.sources.len() as u32;
        self.sources.extend(other.sources.iter().cloned());
        self.data.extend_from(&other.data);
        self.provenance.extend(other.provenance.iter().map(|p| Provenance {
            clip_id: p.clip_id + offset,
            frame_index: p.frame_index,
        }));
    }
}

/// Gate threshold at `q`-th percentile of the speech frames' energies.
pub fn speech_energy_percentile(clips: &[ClipFeatures], q: f64) -> Option<f64> {
    let energies: Vec<f64> = clips
        .iter()
        .filter(|c| c.label == Label::Speech)
        .flat_map(|c| c.vectors.iter().map(FeatureVector::energy))
        .collect();
    percentile(&energies, q)
}
