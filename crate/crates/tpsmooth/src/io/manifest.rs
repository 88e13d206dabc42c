use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub const FORMAT_VERSION: u32 = 1;

/// `manifest.json` of a sequence or run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub format_version: u32,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub object_ids: Vec<u32>,
    pub fps: f64,
    pub source: String,
}

impl SequenceManifest {
    pub fn validate(&self) -> AppResult<()> {
        let fail = |m: String| Err(AppError::Config(format!("manifest: {m}")));
        if self.format_version != FORMAT_VERSION {
            return fail(format!("format_version {} is not {FORMAT_VERSION}", self.format_version));
        }
        if self.width == 0 || self.height == 0 {
            return fail("width and height must be positive".into());
        }
        if self.frame_count == 0 {
            return fail("frame_count must be positive".into());
        }
        if self.object_ids.is_empty() {
            return fail("object_ids is empty".into());
        }
        let mut ids = self.object_ids.clone();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.object_ids.len() {
            return fail("object_ids are not unique".into());
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return fail(format!("fps {} is not a positive number", self.fps));
        }
        Ok(())
    }
}
