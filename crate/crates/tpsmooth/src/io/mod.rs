//! On-disk formats. All multi-byte values are little-endian.

use std::fs;
use std::path::Path;

use crate::error::{AppError, AppResult};

pub mod flo;
pub mod layout;
pub mod manifest;
pub mod pgm;
pub mod tpsm;

pub use manifest::SequenceManifest;

/// Parse failures of the binary readers. Offsets are in bytes from the
/// start of the file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic at offset {offset}: expected {expected:?}")]
    BadMagic { offset: usize, expected: &'static str },

    #[error("unsupported version {found} at offset {offset} (expected {expected})")]
    VersionMismatch { offset: usize, found: u32, expected: u32 },

    #[error("truncated at offset {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },

    #[error("trailing data at offset {offset}")]
    TrailingData { offset: usize },

    #[error("bad header at offset {offset}: {reason}")]
    BadHeader { offset: usize, reason: String },

    #[error("unsupported format at offset {offset}: {reason}")]
    Unsupported { offset: usize, reason: String },

    #[error("value {value} out of range at offset {offset}")]
    OutOfRange { offset: usize, value: f64 },

    #[error("non-binary mask value {value} at offset {offset}")]
    NonBinaryMask { offset: usize, value: u8 },
}

/// Bounds-checked little-endian cursor.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let left = self.bytes.len() - self.pos;
        if left < n {
            return Err(FormatError::Truncated { offset: self.bytes.len(), needed: n - left });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn i32(&mut self) -> Result<i32, FormatError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn finish(&self) -> Result<(), FormatError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(FormatError::TrailingData { offset: self.pos })
        }
    }
}

/// Checks that `count` payload bytes are present before allocating for them.
pub(crate) fn ensure_available(r: &Reader<'_>, count: u64) -> Result<(), FormatError> {
    let left = (r.bytes.len() - r.pos) as u64;
    if left < count {
        let needed = usize::try_from(count - left).unwrap_or(usize::MAX);
        return Err(FormatError::Truncated { offset: r.bytes.len(), needed });
    }
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> AppResult<Vec<u8>> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> AppResult<T> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|source| AppError::Json { path: path.into(), source })
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_file(path, text.as_bytes())
}
