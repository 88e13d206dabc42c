//! Directory layout shared by sequences and runs.
//!
//! ```text
//! manifest.json
//! frames/frame_NNNNNN.pgm
//! probs/probs_NNNNNN.tpsm
//! gt/obj_<id>/mask_NNNNNN.pgm       (synthetic sequences)
//! gt_flow/flow_NNNNNN.flo           (synthetic sequences)
//! masks/obj_<id>/mask_NNNNNN.pgm    (smoothing runs)
//! ```
//!
//! Flow file `N` holds the displacement from frame `N` to frame `N + 1`.

use std::path::{Path, PathBuf};

use tpsmooth_core::{Error as CoreError, FlowField, GrayFrame, Mask, ScalarField};

use super::{flo, pgm, read_file, read_json, tpsm, write_file, write_json, SequenceManifest};
use crate::error::{AppError, AppResult};

pub const MANIFEST: &str = "manifest.json";
pub const RUN_CONFIG: &str = "run_config.json";

pub fn frame_path(dir: &Path, t: usize) -> PathBuf {
    dir.join("frames").join(format!("frame_{t:06}.pgm"))
}

pub fn probs_path(dir: &Path, t: usize) -> PathBuf {
    dir.join("probs").join(format!("probs_{t:06}.tpsm"))
}

/// `kind` is `"gt"` or `"masks"`.
pub fn mask_path(dir: &Path, kind: &str, id: u32, t: usize) -> PathBuf {
    dir.join(kind).join(format!("obj_{id}")).join(format!("mask_{t:06}.pgm"))
}

pub fn flow_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("flow_{t:06}.flo"))
}

pub fn backward_flow_path(dir: &Path, t: usize) -> PathBuf {
    dir.join(format!("flow_bwd_{t:06}.flo"))
}

fn require(path: &Path, what: &str, t: usize) -> AppResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CoreError::Sequencing(format!("missing {what} for frame {t}: {}", path.display())).into())
    }
}

fn check_dims(path: &Path, found: (usize, usize), m: &SequenceManifest) -> AppResult<()> {
    if found != (m.width, m.height) {
        return Err(AppError::schema(
            path,
            format!("{}x{} does not match manifest {}x{}", found.0, found.1, m.width, m.height),
        ));
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> AppResult<SequenceManifest> {
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Err(AppError::io(&path, std::io::Error::new(std::io::ErrorKind::NotFound, "no manifest.json")));
    }
    let m: SequenceManifest = read_json(&path)?;
    m.validate()?;
    Ok(m)
}

pub fn write_manifest(dir: &Path, m: &SequenceManifest) -> AppResult<()> {
    write_json(&dir.join(MANIFEST), m)
}

pub fn read_frame(dir: &Path, t: usize, m: &SequenceManifest) -> AppResult<GrayFrame> {
    let path = frame_path(dir, t);
    require(&path, "frame", t)?;
    let frame = pgm::decode_frame(&read_file(&path)?).map_err(|e| AppError::format(&path, e))?;
    check_dims(&path, frame.dims(), m)?;
    Ok(frame)
}

pub fn read_frames(dir: &Path, m: &SequenceManifest) -> AppResult<Vec<GrayFrame>> {
    (0..m.frame_count).map(|t| read_frame(dir, t, m)).collect()
}

pub fn write_frame(dir: &Path, t: usize, frame: &GrayFrame) -> AppResult<()> {
    write_file(&frame_path(dir, t), &pgm::encode_frame(frame))
}

pub fn read_probs(dir: &Path, t: usize, m: &SequenceManifest) -> AppResult<Vec<ScalarField>> {
    let path = probs_path(dir, t);
    require(&path, "probability container", t)?;
    let planes = tpsm::decode(&read_file(&path)?).map_err(|e| AppError::format(&path, e))?;
    check_dims(&path, planes[0].dims(), m)?;
    if planes.len() != m.object_ids.len() {
        return Err(AppError::schema(&path, format!("{} planes for {} objects", planes.len(), m.object_ids.len())));
    }
    Ok(planes)
}

pub fn write_probs(dir: &Path, t: usize, planes: &[ScalarField]) -> AppResult<()> {
    write_file(&probs_path(dir, t), &tpsm::encode(planes))
}

pub fn read_masks(dir: &Path, kind: &str, m: &SequenceManifest) -> AppResult<Vec<Vec<Mask>>> {
    (0..m.frame_count)
        .map(|t| {
            m.object_ids
                .iter()
                .map(|&id| {
                    let path = mask_path(dir, kind, id, t);
                    require(&path, "mask", t)?;
                    let mask = pgm::decode_mask(&read_file(&path)?).map_err(|e| AppError::format(&path, e))?;
                    check_dims(&path, mask.dims(), m)?;
                    Ok(mask)
                })
                .collect()
        })
        .collect()
}

pub fn write_masks(dir: &Path, kind: &str, t: usize, ids: &[u32], masks: &[Mask]) -> AppResult<()> {
    for (&id, mask) in ids.iter().zip(masks) {
        write_file(&mask_path(dir, kind, id, t), &pgm::encode_mask(mask))?;
    }
    Ok(())
}

pub fn read_flow(path: &Path, m: &SequenceManifest, t: usize) -> AppResult<FlowField> {
    require(path, "flow file", t)?;
    let flow = flo::decode(&read_file(path)?).map_err(|e| AppError::format(path, e))?;
    check_dims(path, flow.dims(), m)?;
    Ok(flow)
}

/// Forward flows `0 -> 1, ..., T-2 -> T-1` from a flow directory.
pub fn read_flows(dir: &Path, m: &SequenceManifest) -> AppResult<Vec<FlowField>> {
    (0..m.frame_count.saturating_sub(1)).map(|t| read_flow(&flow_path(dir, t), m, t)).collect()
}

pub fn write_flow(path: &Path, flow: &FlowField) -> AppResult<()> {
    write_file(path, &flo::encode(flow))
}
