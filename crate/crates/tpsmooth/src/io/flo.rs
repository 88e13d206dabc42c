//! Middlebury optical flow: f32 tag 202021.25, i32 width and height, then
//! interleaved `(u, v)` f32 pairs in row-major order.

use tpsmooth_core::FlowField;

use super::{ensure_available, FormatError, Reader};

pub const TAG: f32 = 202021.25;
pub const HEADER_LEN: usize = 12;

pub fn file_len(width: usize, height: usize) -> usize {
    HEADER_LEN + 8 * width * height
}

pub fn encode(flow: &FlowField) -> Vec<u8> {
    let (w, h) = flow.dims();
    let mut out = Vec::with_capacity(file_len(w, h));
    out.extend_from_slice(&TAG.to_le_bytes());
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    for (&u, &v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&(u as f32).to_le_bytes());
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FlowField, FormatError> {
    let mut r = Reader::new(bytes);
    let tag = r.f32()?;
    if tag.to_bits() != TAG.to_bits() {
        return Err(FormatError::BadMagic { offset: 0, expected: "202021.25" });
    }
    let mut dims = [0usize; 2];
    for (slot, offset) in dims.iter_mut().zip([4, 8]) {
        let v = r.i32()?;
        if v <= 0 {
            return Err(FormatError::BadHeader { offset, reason: format!("dimension {v} is not positive") });
        }
        *slot = v as usize;
    }
    let [w, h] = dims;
    ensure_available(&r, 8 * w as u64 * h as u64)?;
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        for dst in [&mut u, &mut v] {
            let offset = r.pos();
            let x = r.f32()?;
            if !x.is_finite() {
                return Err(FormatError::OutOfRange { offset, value: x as f64 });
            }
            dst.push(x as f64);
        }
    }
    r.finish()?;
    Ok(FlowField::new(w, h, u, v).expect("validated field"))
}
