//! Audio clips, WAV decoding from bytes, and fixed-length framing.

use alloc::string::String;
use alloc::vec::Vec;

/// A decoded mono recording with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    pub source_path: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, source_path: impl Into<String>) -> Self {
        Self {
            samples,
            sample_rate_hz,
            source_path: source_path.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AudioError {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(&'static str),
    #[error("unsupported WAV encoding: format code {format}, {bits} bits per sample")]
    UnsupportedEncoding { format: u16, bits: u16 },
    #[error("invalid frame spec: {0}")]
    InvalidFrameSpec(&'static str),
}

/// Frame duration and overlap, in whole milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub frame_ms: u32,
    pub overlap_ms: u32,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            frame_ms: 25,
            overlap_ms: 15,
        }
    }
}

impl FrameSpec {
    pub fn new(frame_ms: u32, overlap_ms: u32) -> Result<Self, AudioError> {
        let spec = Self {
            frame_ms,
            overlap_ms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), AudioError> {
        if self.frame_ms == 0 {
            return Err(AudioError::InvalidFrameSpec("frame_ms must be positive"));
        }
        if self.overlap_ms >= self.frame_ms {
            return Err(AudioError::InvalidFrameSpec("overlap_ms must be below frame_ms"));
        }
        Ok(())
    }

    pub fn hop_ms(&self) -> u32 {
        self.frame_ms - self.overlap_ms
    }

    /// Frame length in samples at `rate`, `floor(frame_ms * rate / 1000)`.
    pub fn frame_len(&self, rate: u32) -> usize {
        (self.frame_ms as u64 * rate as u64 / 1000) as usize
    }

    /// Hop in samples at `rate`, `floor(hop_ms * rate / 1000)`.
    pub fn hop_len(&self, rate: u32) -> usize {
        (self.hop_ms() as u64 * rate as u64 / 1000) as usize
    }

    /// Number of complete frames in a clip of `len` samples.
    pub fn frame_count(&self, len: usize, rate: u32) -> usize {
        let frame_len = self.frame_len(rate);
        let hop = self.hop_len(rate);
        if frame_len == 0 || hop == 0 || len < frame_len {
            return 0;
        }
        (len - frame_len) / hop + 1
    }
}

/// A window of samples borrowed from its clip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<'a> {
    pub samples: &'a [f64],
    pub clip_index: usize,
    pub start_sample: usize,
}

/// Cuts `clip` into overlapping frames. Trailing samples that do not fill a
/// whole frame are dropped; a clip shorter than one frame yields nothing.
pub fn frame_clip<'a>(clip: &'a AudioClip, spec: &FrameSpec) -> Vec<Frame<'a>> {
    let rate = clip.sample_rate_hz;
    let frame_len = spec.frame_len(rate);
    let hop = spec.hop_len(rate);
    let count = spec.frame_count(clip.samples.len(), rate);
    (0..count)
        .map(|i| {
            let start = i * hop;
            Frame {
                samples: &clip.samples[start..start + frame_len],
                clip_index: i,
                start_sample: start,
            }
        })
        .collect()
}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encodings accepted by [`decode_wav`] and produced by [`encode_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

struct FmtChunk {
    format: SampleFormat,
    channels: u16,
    sample_rate: u32,
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk, AudioError> {
    if body.len() < 16 {
        return Err(AudioError::MalformedHeader("fmt chunk shorter than 16 bytes"));
    }
    let mut code = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let bits = u16_at(body, 14);
    if code == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID.
        if body.len() < 40 {
            return Err(AudioError::MalformedHeader("truncated WAVE_FORMAT_EXTENSIBLE"));
        }
        code = u16_at(body, 24);
    }
    if channels == 0 {
        return Err(AudioError::MalformedHeader("zero channels"));
    }
    if sample_rate == 0 {
        return Err(AudioError::MalformedHeader("zero sample rate"));
    }
    let format = match (code, bits) {
        (FORMAT_PCM, 16) => SampleFormat::Pcm16,
        (FORMAT_IEEE_FLOAT, 32) => SampleFormat::Float32,
        (format, bits) => return Err(AudioError::UnsupportedEncoding { format, bits }),
    };
    Ok(FmtChunk {
        format,
        channels,
        sample_rate,
    })
}

/// Decodes a RIFF/WAVE byte buffer into a mono clip.
///
/// 16-bit PCM is divided by 32768, float samples are clamped to `[-1, 1]`,
/// and multi-channel audio is downmixed by the per-sample mean.
pub fn decode_wav(bytes: &[u8], source_path: &str) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 {
        return Err(AudioError::MalformedHeader("shorter than the RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::MalformedHeader("missing RIFF/WAVE magic"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or(AudioError::MalformedHeader("chunk size overflow"))?;
        if body_end > bytes.len() {
            return Err(AudioError::MalformedHeader("chunk length exceeds file size"));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word aligned.
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or(AudioError::MalformedHeader("missing fmt chunk"))?;
    let data = data.ok_or(AudioError::MalformedHeader("missing data chunk"))?;
    let channels = fmt.channels as usize;
    let width = match fmt.format {
        SampleFormat::Pcm16 => 2,
        SampleFormat::Float32 => 4,
    };
    let block = width * channels;
    if data.len() % block != 0 {
        return Err(AudioError::MalformedHeader("data length is not a whole number of frames"));
    }

    let decode = |chunk: &[u8]| -> f64 {
        match fmt.format {
            SampleFormat::Pcm16 => i16::from_le_bytes([chunk[0], chunk[1]]) as f64 / 32768.0,
            SampleFormat::Float32 => {
                let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64;
                if v.is_nan() {
                    0.0
                } else {
                    v.clamp(-1.0, 1.0)
                }
            }
        }
    };

    let samples = data
        .chunks_exact(block)
        .map(|frame| {
            if channels == 1 {
                decode(frame)
            } else {
                frame.chunks_exact(width).map(decode).sum::<f64>() / channels as f64
            }
        })
        .collect();

    Ok(AudioClip::new(samples, fmt.sample_rate, source_path))
}

/// Quantizes a sample in `[-1, 1]` to 16-bit PCM (inverse of the decoder's
/// division by 32768, saturating at the positive end).
pub fn quantize_pcm16(x: f64) -> i16 {
    let v = libm::round(x.clamp(-1.0, 1.0) * 32768.0);
    v.clamp(-32768.0, 32767.0) as i16
}

/// Encodes interleaved samples as a canonical 44-byte-header WAV file.
pub fn encode_wav(interleaved: &[f64], channels: u16, sample_rate: u32, format: SampleFormat) -> Vec<u8> {
    let (code, width) = match format {
        SampleFormat::Pcm16 => (FORMAT_PCM, 2u16),
        SampleFormat::Float32 => (FORMAT_IEEE_FLOAT, 4u16),
    };
    let data_len = interleaved.len() * width as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&code.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let block_align = channels * width;
    out.extend_from_slice(&(sample_rate * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&(width * 8).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in interleaved {
        match format {
            SampleFormat::Pcm16 => out.extend_from_slice(&quantize_pcm16(s).to_le_bytes()),
            SampleFormat::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn one_second_at_16k_gives_98_frames() {
        let clip = AudioClip::new(vec![0.0; 16000], 16000, "a.wav");
        let spec = FrameSpec::default();
        assert_eq!(spec.frame_len(16000), 400);
        assert_eq!(spec.hop_len(16000), 160);
        assert_eq!(frame_clip(&clip, &spec).len(), 98);
    }

    #[test]
    fn frame_boundaries() {
        let spec = FrameSpec::default();
        let short = AudioClip::new(vec![0.0; 399], 16000, "");
        assert!(frame_clip(&short, &spec).is_empty());
        let exact = AudioClip::new(vec![0.0; 400], 16000, "");
        let frames = frame_clip(&exact, &spec);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].start_sample, 0);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(FrameSpec::new(25, 25).is_err());
        assert!(FrameSpec::new(0, 0).is_err());
        assert!(FrameSpec::new(25, 15).is_ok());
    }

    #[test]
    fn mono_pcm16_decodes() {
        let samples: Vec<f64> = (0..16000).map(|i| (i as f64 * 0.01).sin() * 0.5).collect();
        let bytes = encode_wav(&samples, 1, 16000, SampleFormat::Pcm16);
        let clip = decode_wav(&bytes, "x.wav").unwrap();
        assert_eq!(clip.len(), 16000);
        assert_eq!(clip.sample_rate_hz, 16000);
        for (a, b) in clip.samples.iter().zip(&samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn pcm16_extremes() {
        assert_eq!(quantize_pcm16(-1.0), -32768);
        assert_eq!(quantize_pcm16(1.0), 32767);
        let bytes = encode_wav(&[-1.0], 1, 8000, SampleFormat::Pcm16);
        assert_eq!(decode_wav(&bytes, "").unwrap().samples, vec![-1.0]);
    }

    #[test]
    fn stereo_opposite_channels_cancel() {
        let interleaved: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        for format in [SampleFormat::Pcm16, SampleFormat::Float32] {
            let clip = decode_wav(&encode_wav(&interleaved, 2, 8000, format), "").unwrap();
            assert_eq!(clip.len(), 100);
            assert!(clip.samples.iter().all(|&s| s == 0.0));
        }
    }

    #[test]
    fn truncated_data_is_malformed() {
        let mut bytes = encode_wav(&[0.1; 100], 1, 8000, SampleFormat::Pcm16);
        bytes.truncate(bytes.len() - 10);
        assert!(matches!(decode_wav(&bytes, ""), Err(AudioError::MalformedHeader(_))));
    }

    #[test]
    fn not_riff_is_malformed() {
        assert!(matches!(decode_wav(b"RIFX0000WAVE", ""), Err(AudioError::MalformedHeader(_))));
        assert!(matches!(decode_wav(b"RIF", ""), Err(AudioError::MalformedHeader(_))));
    }

    #[test]
    fn unsupported_bit_depth() {
        let mut bytes = encode_wav(&[0.0; 4], 1, 8000, SampleFormat::Pcm16);
        // rewrite as 8-bit PCM
        bytes[34] = 8;
        assert_eq!(
            decode_wav(&bytes, ""),
            Err(AudioError::UnsupportedEncoding { format: 1, bits: 8 })
        );
        let mut bytes = encode_wav(&[0.0; 4], 1, 8000, SampleFormat::Pcm16);
        bytes[20] = 2; // ADPCM
        assert!(matches!(decode_wav(&bytes, ""), Err(AudioError::UnsupportedEncoding { format: 2, .. })));
    }

    #[test]
    fn skips_unknown_chunks() {
        let base = encode_wav(&[0.25, -0.25], 1, 8000, SampleFormat::Float32);
        let mut bytes = base[..12].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]); // odd size plus pad byte
        bytes.extend_from_slice(&base[12..]);
        let clip = decode_wav(&bytes, "").unwrap();
        assert_eq!(clip.samples, vec![0.25, -0.25]);
    }

    proptest! {
        #[test]
        fn frame_count_matches_closed_form(
            len in 0usize..50_000,
            rate in prop::sample::select(vec![8000u32, 11025, 16000, 22050, 44100, 48000]),
            frame_ms in 1u32..60,
            overlap_frac in 0.0f64..1.0,
        ) {
            let overlap_ms = ((frame_ms as f64) * overlap_frac) as u32;
            let spec = FrameSpec::new(frame_ms, overlap_ms.min(frame_ms - 1)).unwrap();
            let clip = AudioClip::new(vec![0.0; len], rate, "");
            let frame_len = (spec.frame_ms as usize * rate as usize) / 1000;
            let hop = (spec.hop_ms() as usize * rate as usize) / 1000;
            let expected = if len >= frame_len { (len - frame_len) / hop + 1 } else { 0 };
            prop_assert_eq!(frame_clip(&clip, &spec).len(), expected);
        }

        #[test]
        fn frames_reconstruct_clip(samples in prop::collection::vec(-1.0f64..1.0, 0..3000)) {
            let clip = AudioClip::new(samples, 16000, "");
            let spec = FrameSpec::default();
            for (i, f) in frame_clip(&clip, &spec).iter().enumerate() {
                prop_assert_eq!(f.clip_index, i);
                prop_assert_eq!(f.start_sample, i * 160);
                prop_assert_eq!(f.samples, &clip.samples[f.start_sample..f.start_sample + 400]);
            }
        }

        #[test]
        fn identical_stereo_equals_mono(samples in prop::collection::vec(-1.0f64..1.0, 1..500)) {
            let mono = decode_wav(&encode_wav(&samples, 1, 16000, SampleFormat::Pcm16), "").unwrap();
            let stereo: Vec<f64> = samples.iter().flat_map(|&s| [s, s]).collect();
            let downmixed = decode_wav(&encode_wav(&stereo, 2, 16000, SampleFormat::Pcm16), "").unwrap();
            prop_assert_eq!(mono.samples, downmixed.samples);
        }
    }
}
