//! Binary feature files.
//!
//! Little-endian layout: magic `VADF`, u32 version (1), u32 row count,
//! u32 dimension (13), then per row 13 f32 coefficients, an i8 label
//! (+1 speech, -1 non-speech), a u32 clip id and a u32 frame index.
//!
//! An optional trailer follows the rows: magic `VADM`, u32 byte length and
//! a UTF-8 JSON object with the gate threshold, seed, run config and the
//! clip source names. Readers ignore any other trailing bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vad_core::dataset::Label;
use vad_core::features::{LabeledDataset, Provenance};
use vad_core::N_MFCC;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VADF";
pub const TRAILER_MAGIC: &[u8; 4] = b"VADM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
const ROW_LEN: usize = N_MFCC * 4 + 1 + 4 + 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatFileError {
    #[error("not a feature file (bad magic)")]
    BadMagic,
    #[error("unsupported feature file version {0}")]
    UnsupportedVersion(u32),
    #[error("feature dimension {0}, expected {N_MFCC}")]
    BadDimension(u32),
    #[error("truncated: {rows} rows need {needed} bytes, file has {actual}")]
    Truncated { rows: u32, needed: usize, actual: usize },
    #[error("row {row}: invalid label {value}")]
    BadLabel { row: usize, value: i8 },
    #[error("row {row}: non-finite coefficient")]
    NonFinite { row: usize },
    #[error("metadata trailer: {0}")]
    BadTrailer(String),
}

/// Provenance of a feature file, stored in its trailer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    /// Gate threshold chosen at extraction time, if any.
    pub gate_threshold: Option<f64>,
    pub seed: u64,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub dataset: LabeledDataset,
    pub meta: Option<FeatureMeta>,
}

#[derive(Serialize, Deserialize)]
struct Trailer {
    version: u32,
    gate_threshold: Option<f64>,
    seed: u64,
    config: RunConfig,
    sources: Vec<String>,
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn encode(file: &FeatureFile) -> Vec<u8> {
    let ds = &file.dataset;
    let mut out = Vec::with_capacity(HEADER_LEN + ds.len() * ROW_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ds.len() as u32).to_le_bytes());
    out.extend_from_slice(&(N_MFCC as u32).to_le_bytes());
    for i in 0..ds.len() {
        for &v in ds.data.row(i) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.push(ds.data.label(i).as_i8() as u8);
        let p = ds.provenance[i];
        out.extend_from_slice(&p.clip_id.to_le_bytes());
        out.extend_from_slice(&p.frame_index.to_le_bytes());
    }
    if let Some(meta) = &file.meta {
        let trailer = Trailer {
            version: VERSION,
            gate_threshold: meta.gate_threshold,
            seed: meta.seed,
            config: meta.config.clone(),
            sources: ds.sources.clone(),
        };
        let json = serde_json::to_vec(&trailer).expect("trailer serializes");
        out.extend_from_slice(TRAILER_MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FeatureFile, FeatFileError> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(FeatFileError::BadMagic);
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(FeatFileError::UnsupportedVersion(version));
    }
    let rows = read_u32(bytes, 8);
    let dim = read_u32(bytes, 12);
    if dim as usize != N_MFCC {
        return Err(FeatFileError::BadDimension(dim));
    }
    let body_end = HEADER_LEN + rows as usize * ROW_LEN;
    if bytes.len() < body_end {
        return Err(FeatFileError::Truncated {
            rows,
            needed: body_end,
            actual: bytes.len(),
        });
    }

    let mut ds = LabeledDataset::default();
    let mut max_clip: Option<u32> = None;
    for (row, chunk) in bytes[HEADER_LEN..body_end].chunks_exact(ROW_LEN).enumerate() {
        let mut values = [0.0f64; N_MFCC];
        for (k, v) in values.iter_mut().enumerate() {
            *v = f32::from_le_bytes(chunk[k * 4..k * 4 + 4].try_into().unwrap()) as f64;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatFileError::NonFinite { row });
        }
        let at = N_MFCC * 4;
        let raw = chunk[at] as i8;
        let label = Label::from_i8(raw).ok_or(FeatFileError::BadLabel { row, value: raw })?;
        let clip_id = read_u32(chunk, at + 1);
        let frame_index = read_u32(chunk, at + 5);
        max_clip = Some(max_clip.map_or(clip_id, |m| m.max(clip_id)));
        ds.data.push(&values, label);
        ds.provenance.push(Provenance { clip_id, frame_index });
    }

    let trailer = &bytes[body_end..];
    let meta = if trailer.len() >= 8 && &trailer[..4] == TRAILER_MAGIC {
        let len = read_u32(trailer, 4) as usize;
        let json = trailer
            .get(8..8 + len)
            .ok_or_else(|| FeatFileError::BadTrailer("declared length exceeds file".into()))?;
        let t: Trailer = serde_json::from_slice(json).map_err(|e| FeatFileError::BadTrailer(e.to_string()))?;
        if max_clip.is_some_and(|m| m as usize >= t.sources.len()) {
            return Err(FeatFileError::BadTrailer("clip id without a source name".into()));
        }
        ds.sources = t.sources;
        Some(FeatureMeta {
            gate_threshold: t.gate_threshold,
            seed: t.seed,
            config: t.config,
        })
    } else {
        None
    };
    if meta.is_none() {
        let n = max_clip.map_or(0, |m| m as usize + 1);
        ds.sources = (0..n).map(|i| format!("clip-{i}")).collect();
    }
    Ok(FeatureFile { dataset: ds, meta })
}

pub fn write_features(path: impl AsRef<Path>, file: &FeatureFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(file)).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::FeatureFile {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vad_core::FeatureVector;

    fn sample() -> FeatureFile {
        let mut ds = LabeledDataset::default();
        ds.sources = vec!["a.wav".into(), "b.wav".into()];
        for i in 0..5u32 {
            let mut v = [0.0; N_MFCC];
            for (k, x) in v.iter_mut().enumerate() {
                *x = (i as f64 - 2.0) * 0.5 + k as f64 * 0.25;
            }
            let label = if i < 3 { Label::Speech } else { Label::NonSpeech };
            ds.push(
                &FeatureVector(v),
                label,
                Provenance {
                    clip_id: i / 3,
                    frame_index: i % 3,
                },
            );
        }
        FeatureFile {
            dataset: ds,
            meta: Some(FeatureMeta {
                gate_threshold: Some(-12.5),
                seed: 3,
                config: RunConfig::default(),
            }),
        }
    }

    #[test]
    fn round_trip_with_trailer() {
        let file = sample();
        let bytes = encode(&file);
        assert_eq!(&bytes[..4], MAGIC);
        assert_eq!(decode(&bytes).unwrap(), file);
    }

    #[test]
    fn reader_ignores_unknown_trailing_bytes() {
        let mut file = sample();
        file.meta = None;
        let mut bytes = encode(&file);
        assert_eq!(bytes.len(), HEADER_LEN + 5 * ROW_LEN);
        bytes.extend_from_slice(b"something else");
        let back = decode(&bytes).unwrap();
        assert_eq!(back.dataset.data, file.dataset.data);
        assert_eq!(back.dataset.sources, vec!["clip-0", "clip-1"]);
    }

    #[test]
    fn truncated_rows_are_rejected() {
        let bytes = encode(&sample());
        let cut = &bytes[..HEADER_LEN + 2 * ROW_LEN + 3];
        assert!(matches!(decode(cut), Err(FeatFileError::Truncated { rows: 5, .. })));
        assert_eq!(decode(b"RIFF0000000000000000"), Err(FeatFileError::BadMagic));
    }
}
