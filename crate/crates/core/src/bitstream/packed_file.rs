use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BitSequence, BitstreamError};
use crate::fsutil::atomic_write;

/// Contents of the `.bits.meta` sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamMetadata {
    pub bit_count: u64,
    pub source_descriptor: String,
    pub created_at: String,
    pub config_digest: String,
    /// Bit offsets where a new acquisition epoch starts after a gap.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epoch_starts: Vec<u64>,
}

impl StreamMetadata {
    /// Metadata describing `seq`, stamped with the current UTC time.
    pub fn for_sequence(seq: &BitSequence, origin: &StreamOrigin) -> Self {
        Self {
            bit_count: seq.len() as u64,
            source_descriptor: origin.descriptor.clone(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config_digest: origin.config_digest.clone(),
            epoch_starts: origin.epoch_starts.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, BitstreamError> {
        toml::from_str(text).map_err(|e| BitstreamError::CorruptStream(format!("bad metadata: {e}")))
    }
}

/// Provenance recorded alongside a written stream.
#[derive(Debug, Clone, Default)]
pub struct StreamOrigin {
    pub descriptor: String,
    pub config_digest: String,
    pub epoch_starts: Vec<u64>,
}

/// Sidecar path for a `.bits` file: the same name with `.meta` appended.
pub fn meta_path(bits_path: &Path) -> PathBuf {
    let mut name: OsString = bits_path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Writes the packed bytes to `path` and the metadata to its sidecar. Both
/// files are written atomically.
pub fn write_packed(
    seq: &BitSequence,
    path: &Path,
    origin: &StreamOrigin,
) -> Result<StreamMetadata, BitstreamError> {
    let meta = StreamMetadata::for_sequence(seq, origin);
    write_packed_with_meta(seq, path, &meta)?;
    Ok(meta)
}

/// Writes `seq` and a caller-supplied sidecar. `meta.bit_count` must match.
pub fn write_packed_with_meta(seq: &BitSequence, path: &Path, meta: &StreamMetadata) -> Result<(), BitstreamError> {
    if meta.bit_count != seq.len() as u64 {
        return Err(BitstreamError::CorruptStream(format!(
            "metadata declares {} bits for a {}-bit sequence",
            meta.bit_count,
            seq.len()
        )));
    }
    atomic_write(path, |out| out.write_all(seq.as_bytes()))?;
    let text = meta.to_toml();
    atomic_write(&meta_path(path), |out| out.write_all(text.as_bytes()))?;
    Ok(())
}

/// Reads a `.bits` file. Without explicit metadata the sidecar is loaded;
/// a missing sidecar is an error because raw bytes cannot express lengths
/// that are not a multiple of eight.
pub fn read_packed(path: &Path, meta: Option<&StreamMetadata>) -> Result<BitSequence, BitstreamError> {
    let loaded;
    let meta = match meta {
        Some(m) => m,
        None => {
            let sidecar = meta_path(path);
            let text = match fs::read_to_string(&sidecar) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    return Err(BitstreamError::ExplicitLengthRequired(sidecar.display().to_string()))
                }
                Err(e) => return Err(e.into()),
            };
            loaded = StreamMetadata::from_toml(&text)?;
            &loaded
        }
    };
    read_packed_exact(path, meta.bit_count)
}

pub fn read_packed_exact(path: &Path, bit_count: u64) -> Result<BitSequence, BitstreamError> {
    let file_len = fs::metadata(path)?.len();
    if file_len != bit_count.div_ceil(8) {
        return Err(BitstreamError::CorruptStream(format!(
            "{} holds {file_len} bytes but metadata declares {bit_count} bits",
            path.display()
        )));
    }
    let bit_len = usize::try_from(bit_count)
        .map_err(|_| BitstreamError::CorruptStream("bit count exceeds address space".into()))?;
    BitSequence::from_packed(fs::read(path)?, bit_len)
}
