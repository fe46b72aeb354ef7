//! `path,label` CSV manifests.
//!
//! Labels are `speech`, `music` or `noise`. A leading `path,label` header row
//! is optional. Relative paths are resolved against the manifest's directory
//! when loading audio, but are kept verbatim as the clip's source name.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vad_core::dataset::Label;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipClass {
    Speech,
    Music,
    Noise,
}

impl ClipClass {
    pub fn label(self) -> Label {
        match self {
            ClipClass::Speech => Label::Speech,
            ClipClass::Music | ClipClass::Noise => Label::NonSpeech,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClipClass::Speech => "speech",
            ClipClass::Music => "music",
            ClipClass::Noise => "noise",
        }
    }
}

impl fmt::Display for ClipClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClipClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "speech" => Ok(ClipClass::Speech),
            "music" => Ok(ClipClass::Music),
            "noise" => Ok(ClipClass::Noise),
            other => Err(format!("unknown label {other:?} (expected speech, music or noise)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path as written in the manifest.
    pub path: String,
    /// Path to open, relative paths joined to the manifest directory.
    pub resolved: PathBuf,
    pub class: ClipClass,
}

/// Parses manifest text. `base` is the directory relative paths resolve to.
pub fn parse_manifest(text: &str, base: &Path, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(origin, e))?;
        if record.len() != 2 {
            return Err(Error::parse(origin, format!("row {}: expected 2 fields, got {}", i + 1, record.len())));
        }
        if i == 0 && &record[0] == "path" && &record[1] == "label" {
            continue;
        }
        let class = record[1]
            .parse()
            .map_err(|e| Error::parse(origin, format!("row {}: {e}", i + 1)))?;
        let path = record[0].to_string();
        let resolved = if Path::new(&path).is_absolute() {
            PathBuf::from(&path)
        } else {
            base.join(&path)
        };
        entries.push(ManifestEntry { path, resolved, class });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(&text, base, path)
}

pub fn write_manifest(path: impl AsRef<Path>, rows: &[(String, ClipClass)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::parse(path, e);
    w.write_record(["path", "label"]).map_err(to_err)?;
    for (p, class) in rows {
        w.write_record([p.as_str(), class.as_str()]).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::parse(path, e))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
