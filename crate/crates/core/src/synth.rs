//! Synthetic speech-like and non-speech clips for desk-scale experiments.
//!
//! Speech-like clips are a glottal harmonic stack with a gliding pitch,
//! shaped by moving formant resonances, chopped into syllables by a slow
//! amplitude envelope, with occasional fricative bursts and pauses.
//! Non-speech clips alternate between colored noise whose color drifts
//! slowly and music-like sustained tone stacks with constant pitch per note.
//! Every clip sits on a faint noise floor and gets a random gain.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Label;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipKind {
    Speech,
    Noise,
    Music,
}

impl ClipKind {
    pub fn label(self) -> Label {
        match self {
            ClipKind::Speech => Label::Speech,
            ClipKind::Noise | ClipKind::Music => Label::NonSpeech,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClipKind::Speech => "speech",
            ClipKind::Noise => "noise",
            ClipKind::Music => "music",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_speech: usize,
    pub n_nonspeech: usize,
    pub clip_secs: f64,
    pub sample_rate: u32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_speech: 10,
            n_nonspeech: 10,
            clip_secs: 4.0,
            sample_rate: 16000,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.n_speech + self.n_nonspeech == 0 {
            return Err("at least one clip is required");
        }
        if !(self.clip_secs > 0.0 && self.clip_secs.is_finite()) {
            return Err("clip duration must be positive");
        }
        if self.sample_rate < 8000 {
            return Err("sample rate must be at least 8000 Hz");
        }
        Ok(())
    }

    /// Kind of clip `index`: speech first, then noise and music alternating.
    pub fn kind(&self, index: usize) -> ClipKind {
        if index < self.n_speech {
            ClipKind::Speech
        } else if (index - self.n_speech) % 2 == 0 {
            ClipKind::Noise
        } else {
            ClipKind::Music
        }
    }

    pub fn len(&self) -> usize {
        self.n_speech + self.n_nonspeech
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-clip seed, so clips can be generated independently.
    pub fn clip_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03)
    }

    pub fn clip_name(&self, index: usize) -> String {
        format!("{}-{:04}", self.kind(index).name(), index)
    }

    pub fn generate(&self, index: usize) -> SynthClip {
        let kind = self.kind(index);
        SynthClip {
            name: self.clip_name(index),
            kind,
            samples: synth_clip(kind, self.clip_secs, self.sample_rate, self.clip_seed(index)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub name: String,
    pub kind: ClipKind,
    pub samples: Vec<f64>,
}

/// Generates every clip of `spec` in order.
pub fn synth_corpus(spec: &SynthSpec) -> Vec<SynthClip> {
    (0..spec.len()).map(|i| spec.generate(i)).collect()
}

/// RBJ band-pass biquad (constant 0 dB peak gain).
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl Biquad {
    fn bandpass(center_hz: f64, q: f64, rate: f64) -> Self {
        let w0 = 2.0 * PI * center_hz.min(rate * 0.45) / rate;
        let alpha = math::sin(w0) / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * math::cos(w0) / a0,
            a2: (1.0 - alpha) / a0,
            x1: 0.0,
            x2: 0.0,
            y1: 0.0,
            y2: 0.0,
        }
    }

    fn retune(&mut self, center_hz: f64, q: f64, rate: f64) {
        let fresh = Self::bandpass(center_hz, q, rate);
        self.b0 = fresh.b0;
        self.b2 = fresh.b2;
        self.a1 = fresh.a1;
        self.a2 = fresh.a2;
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.b2 * self.x2 - self.a1 * self.y1 - self.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn gauss(rng: &mut crate::Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Resonance magnitude of a formant at `f`.
#[inline]
fn formant_gain(f: f64, center: f64, bandwidth: f64) -> f64 {
    let d = (f - center) / bandwidth;
    1.0 / (1.0 + d * d)
}

// Rough (F1, F2, F3) targets for a handful of vowels.
const VOWELS: [(f64, f64, f64); 7] = [
    (730.0, 1090.0, 2440.0),
    (270.0, 2290.0, 3010.0),
    (530.0, 1840.0, 2480.0),
    (660.0, 1720.0, 2410.0),
    (570.0, 840.0, 2410.0),
    (300.0, 870.0, 2240.0),
    (440.0, 1020.0, 2240.0),
];

struct Segment {
    len: usize,
    kind: SegmentKind,
    formants: (f64, f64, f64),
    pitch_offset: f64,
    tilt: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum SegmentKind {
    Voiced,
    Fricative,
    Pause,
}

fn speech(n: usize, rate: f64, rng: &mut crate::Rng) -> Vec<f64> {
    let f0_base = rng.random_range(85.0..240.0);
    let intonation_rate = rng.random_range(0.3..1.2);
    let intonation_depth = rng.random_range(0.05..0.2);
    let intonation_phase = rng.random_range(0.0..2.0 * PI);
    let tilt = rng.random_range(0.6..1.4);
    let breathiness = rng.random_range(0.02..0.15);
    let speaker_scale = rng.random_range(0.85..1.2);

    let mut segments = Vec::new();
    let mut total = 0;
    while total < n {
        let r: f64 = rng.random();
        let (kind, secs) = if r < 0.12 {
            (SegmentKind::Pause, rng.random_range(0.08..0.3))
        } else if r < 0.27 {
            (SegmentKind::Fricative, rng.random_range(0.05..0.15))
        } else {
            (SegmentKind::Voiced, rng.random_range(0.12..0.35))
        };
        let v = VOWELS[rng.random_range(0..VOWELS.len())];
        let jitter = |rng: &mut crate::Rng| 1.0 + 0.08 * gauss(rng);
        let len = ((secs * rate) as usize).max(1);
        segments.push(Segment {
            len,
            kind,
            formants: (
                v.0 * speaker_scale * jitter(rng),
                v.1 * speaker_scale * jitter(rng),
                v.2 * speaker_scale * jitter(rng),
            ),
            pitch_offset: 0.1 * gauss(rng),
            tilt: (tilt + 0.25 * gauss(rng)).max(0.3),
        });
        total += len;
    }

    let mut out = Vec::with_capacity(n);
    let max_harm_hz = (rate / 2.0 - 300.0).min(5000.0);
    let mut phases: Vec<f64> = Vec::new();
    let mut amps: Vec<f64> = Vec::new();
    let mut fric = Biquad::bandpass(4000.0, 1.5, rate);
    let mut asp = Biquad::bandpass(1500.0, 2.0, rate);
    let mut formants = segments[0].formants;
    let mut pitch_offset = 0.0;
    let mut cur_tilt = tilt;
    let mut t = 0usize;
    for seg in &segments {
        let fric_center = rng.random_range(2500.0f64..6000.0).min(rate * 0.45);
        fric.retune(fric_center, 1.5, rate);
        for k in 0..seg.len {
            if t >= n {
                break;
            }
            let time = t as f64 / rate;
            // Syllable envelope: raised cosine across the segment.
            let env = 0.5 - 0.5 * math::cos(2.0 * PI * (k as f64 + 0.5) / seg.len as f64);
            // Formants and pitch glide toward the segment targets.
            let glide = 1.0 / (0.02 * rate);
            formants.0 += (seg.formants.0 - formants.0) * glide;
            formants.1 += (seg.formants.1 - formants.1) * glide;
            formants.2 += (seg.formants.2 - formants.2) * glide;
            pitch_offset += (seg.pitch_offset - pitch_offset) * glide;
            cur_tilt += (seg.tilt - cur_tilt) * glide;
            let f0 = f0_base
                * (1.0 + intonation_depth * math::sin(2.0 * PI * intonation_rate * time + intonation_phase) + pitch_offset)
                * (1.0 - 0.05 * time / (n as f64 / rate));
            let n_harm = (max_harm_hz / f0) as usize;
            if phases.len() < n_harm {
                phases.resize(n_harm, 0.0);
                amps.resize(n_harm, 0.0);
            }
            if t % 32 == 0 {
                for h in 0..n_harm {
                    let f = (h + 1) as f64 * f0;
                    let shape = formant_gain(f, formants.0, 90.0)
                        + 0.7 * formant_gain(f, formants.1, 120.0)
                        + 0.4 * formant_gain(f, formants.2, 180.0);
                    amps[h] = shape / math::powf((h + 1) as f64, cur_tilt);
                }
            }
            let mut voiced = 0.0;
            for h in 0..n_harm {
                phases[h] += 2.0 * PI * (h + 1) as f64 * f0 / rate;
                if phases[h] > 2.0 * PI {
                    phases[h] -= 2.0 * PI;
                }
                voiced += amps[h] * math::sin(phases[h]);
            }
            let noise = gauss(rng);
            let sample = match seg.kind {
                SegmentKind::Voiced => env * (voiced + breathiness * 3.0 * asp.process(noise)),
                SegmentKind::Fricative => env * 0.6 * fric.process(noise),
                SegmentKind::Pause => {
                    asp.process(noise);
                    0.0
                }
            };
            out.push(sample);
            t += 1;
        }
    }
    out
}

/// Draws a noise color: one-pole coefficient and resonance centers.
fn noise_color(rng: &mut crate::Rng, n_bands: usize) -> (f64, Vec<f64>) {
    let pole = rng.random_range(-0.5..0.97);
    let centers = (0..n_bands).map(|_| rng.random_range(200.0..6000.0)).collect();
    (pole, centers)
}

fn noise(n: usize, rate: f64, rng: &mut crate::Rng) -> Vec<f64> {
    // One-pole coloring plus a few resonances, all drifting toward a new
    // random color every fraction of a second.
    let n_bands = rng.random_range(0..3);
    let q: Vec<f64> = (0..n_bands).map(|_| rng.random_range(0.7..4.0)).collect();
    let gains: Vec<f64> = (0..n_bands).map(|_| rng.random_range(0.5..2.0)).collect();
    let (mut pole, mut centers) = noise_color(rng, n_bands);
    let mut bands: Vec<Biquad> = centers.iter().zip(&q).map(|(&c, &q)| Biquad::bandpass(c, q, rate)).collect();
    let flutter_rate = rng.random_range(0.2..6.0);
    let flutter_depth = rng.random_range(0.0..0.8);
    let flutter_phase = rng.random_range(0.0..2.0 * PI);
    let glide = 1.0 / (0.15 * rate);
    let mut target = noise_color(rng, n_bands);
    let mut next_change = (rng.random_range(0.3..1.0) * rate) as usize;
    let mut state = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        if t == next_change {
            target = noise_color(rng, n_bands);
            next_change += (rng.random_range(0.3..1.0) * rate) as usize;
        }
        pole += (target.0 - pole) * glide;
        for (c, goal) in centers.iter_mut().zip(&target.1) {
            *c += (goal - *c) * glide;
        }
        if t % 64 == 0 {
            for ((b, &c), &q) in bands.iter_mut().zip(&centers).zip(&q) {
                b.retune(c, q, rate);
            }
        }
        let w = gauss(rng);
        state = pole * state + (1.0 - pole.abs()) * w;
        let mut s = state;
        for (b, g) in bands.iter_mut().zip(&gains) {
            s += g * b.process(w);
        }
        let env = 1.0 - flutter_depth * (0.5 + 0.5 * math::sin(2.0 * PI * flutter_rate * t as f64 / rate + flutter_phase));
        out.push(s * env);
    }
    out
}

struct Note {
    start: usize,
    len: usize,
    freqs: Vec<f64>,
    rolloff: f64,
    n_harm: usize,
}

fn music(n: usize, rate: f64, rng: &mut crate::Rng) -> Vec<f64> {
    let attack = rng.random_range(0.005..0.08) * rate;
    let release_frac = rng.random_range(0.05..0.4);
    let root = rng.random_range(40..70) as f64;
    // Fixed instrument body resonances.
    let body = (rng.random_range(300.0..1200.0), rng.random_range(1200.0..3500.0));
    let vibrato_rate = rng.random_range(4.0..7.0);
    let vibrato_depth = if rng.random_bool(0.5) { rng.random_range(0.002..0.012) } else { 0.0 };
    let mut notes = Vec::new();
    let mut pos = 0usize;
    while pos < n {
        let len = (rng.random_range(0.3..1.2) * rate) as usize;
        let voices = rng.random_range(1..4);
        let degrees = [0.0, 2.0, 4.0, 5.0, 7.0, 9.0, 11.0, 12.0, 14.0, 16.0];
        let freqs = (0..voices)
            .map(|_| {
                let midi = root + degrees[rng.random_range(0..degrees.len())];
                440.0 * math::powf(2.0, (midi - 69.0) / 12.0)
            })
            .collect();
        // Each note may come from a different instrument.
        let rolloff = rng.random_range(0.3..0.8);
        let n_harm = rng.random_range(3..12);
        notes.push(Note {
            start: pos,
            len,
            freqs,
            rolloff,
            n_harm,
        });
        pos += len;
    }
    let mut out = alloc::vec![0.0; n];
    for note in &notes {
        let end = (note.start + note.len).min(n);
        for &f0 in &note.freqs {
            let harmonics: Vec<(f64, f64)> = (1..=note.n_harm)
                .map(|h| {
                    let f = f0 * h as f64;
                    let body = 0.3 + formant_gain(f, body.0, 150.0) + 0.6 * formant_gain(f, body.1, 300.0);
                    (f, body * math::powf(note.rolloff, (h - 1) as f64))
                })
                .filter(|&(f, _)| f < rate / 2.0 - 200.0)
                .collect();
            let phase0 = rng.random_range(0.0..2.0 * PI);
            for (t, slot) in out.iter_mut().enumerate().take(end).skip(note.start) {
                let k = (t - note.start) as f64;
                let release_start = note.len as f64 * (1.0 - release_frac);
                let env = if k < attack {
                    k / attack
                } else if k > release_start {
                    (note.len as f64 - k) / (note.len as f64 - release_start)
                } else {
                    1.0
                };
                let time = k / rate;
                // Phase of a sinusoidal frequency modulation, per unit frequency.
                let warp = time - vibrato_depth * math::cos(2.0 * PI * vibrato_rate * time) / (2.0 * PI * vibrato_rate);
                let mut s = 0.0;
                for &(f, a) in &harmonics {
                    s += a * math::sin(2.0 * PI * f * warp + phase0);
                }
                *slot += env * s;
            }
        }
    }
    out
}

/// Range of the background-noise level under speech clips, in dB below
/// the voice.
const SPEECH_SNR_DB: (f64, f64) = (8.0, 25.0);

fn rms(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64)
}

/// One clip of `secs` seconds, peak-normalized to a random gain and laid
/// over a faint noise floor.
pub fn synth_clip(kind: ClipKind, secs: f64, rate: u32, seed: u64) -> Vec<f64> {
    let mut rng = crate::rng_from_seed(seed);
    let n = (secs * rate as f64) as usize;
    let r = rate as f64;
    let mut samples = match kind {
        ClipKind::Speech => {
            let mut voice = speech(n, r, &mut rng);
            let background = noise(n, r, &mut rng);
            let snr_db = rng.random_range(SPEECH_SNR_DB.0..SPEECH_SNR_DB.1);
            let scale = rms(&voice) / rms(&background).max(1e-12) * math::powf(10.0, -snr_db / 20.0);
            for (v, b) in voice.iter_mut().zip(&background) {
                *v += scale * b;
            }
            voice
        }
        ClipKind::Noise => noise(n, r, &mut rng),
        ClipKind::Music => music(n, r, &mut rng),
    };
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let gain = rng.random_range(0.3..0.45);
    let floor = gain * math::powf(10.0, -rng.random_range(35.0..55.0) / 20.0);
    for s in samples.iter_mut() {
        let scaled = if peak > 0.0 { *s / peak * gain } else { 0.0 };
        *s = (scaled + floor * gauss(&mut rng)).clamp(-1.0, 1.0);
    }
    samples
}
