//! WAV files on disk.

use std::path::Path;

use vad_core::audio::{decode_wav, encode_wav, SampleFormat};
use vad_core::AudioClip;

use crate::error::{Error, Result};

/// Reads a 16-bit PCM or 32-bit float WAV, downmixed to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes, &path.to_string_lossy()).map_err(|source| Error::Audio {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes mono samples.
pub fn save_wav(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32, format: SampleFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_wav(samples, 1, sample_rate, format)).map_err(|e| Error::io(path, e))
}
