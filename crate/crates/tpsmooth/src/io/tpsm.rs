//! Probability container: `"TPSM"`, then u32 version, width, height and
//! object count, then one row-major f32 plane per object.

use tpsmooth_core::ScalarField;

use super::{ensure_available, FormatError, Reader};

pub const MAGIC: &[u8; 4] = b"TPSM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

/// Exact file size for the given shape.
pub fn file_len(width: usize, height: usize, objects: usize) -> usize {
    HEADER_LEN + 4 * width * height * objects
}

/// Serializes planes of equal shape. Values are stored as f32.
pub fn encode(planes: &[ScalarField]) -> Vec<u8> {
    let (w, h) = planes.first().map(|p| p.dims()).unwrap_or((0, 0));
    assert!(planes.iter().all(|p| p.dims() == (w, h)), "planes must share one shape");
    let mut out = Vec::with_capacity(file_len(w, h, planes.len()));
    out.extend_from_slice(MAGIC);
    for v in [VERSION, w as u32, h as u32, planes.len() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for plane in planes {
        for &v in plane.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<ScalarField>, FormatError> {
    let mut r = Reader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(FormatError::BadMagic { offset: 0, expected: "TPSM" });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FormatError::VersionMismatch { offset: 4, found: version, expected: VERSION });
    }
    let width = r.u32()?;
    let height = r.u32()?;
    let objects = r.u32()?;
    for (value, offset, name) in [(width, 8, "width"), (height, 12, "height"), (objects, 16, "object count")] {
        if value == 0 {
            return Err(FormatError::BadHeader { offset, reason: format!("{name} is zero") });
        }
    }
    let plane_len = width as u64 * height as u64;
    ensure_available(&r, 4 * plane_len * objects as u64)?;
    let (w, h) = (width as usize, height as usize);
    let mut planes = Vec::with_capacity(objects as usize);
    for _ in 0..objects {
        let mut data = Vec::with_capacity(w * h);
        for _ in 0..w * h {
            let offset = r.pos();
            let v = r.f32()? as f64;
            if !(0.0..=1.0).contains(&v) {
                return Err(FormatError::OutOfRange { offset, value: v });
            }
            data.push(v);
        }
        planes.push(ScalarField::probability(w, h, data).expect("validated plane"));
    }
    r.finish()?;
    Ok(planes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_file_is_24_bytes() {
        let bytes = encode(&[ScalarField::filled(1, 1, 0.5).unwrap()]);
        assert_eq!(bytes.len(), 24);
        assert_eq!(file_len(1, 1, 1), 24);
        assert_eq!(&bytes[..4], b"TPSM");
        assert_eq!(&bytes[20..], &0.5f32.to_le_bytes());
    }

    #[test]
    fn rejections_are_named() {
        let good = encode(&[ScalarField::filled(2, 1, 0.25).unwrap()]);
        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad), Err(FormatError::BadMagic { offset: 0, expected: "TPSM" }));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode(&bad), Err(FormatError::VersionMismatch { offset: 4, found: 2, .. })));
        let mut bad = good.clone();
        bad[24..28].copy_from_slice(&1.5f32.to_le_bytes());
        assert_eq!(decode(&bad), Err(FormatError::OutOfRange { offset: 24, value: 1.5 }));
        let mut bad = good.clone();
        bad[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode(&bad), Err(FormatError::OutOfRange { offset: 20, .. })));
        let mut bad = good.clone();
        bad.push(0);
        assert_eq!(decode(&bad), Err(FormatError::TrailingData { offset: 28 }));
        let mut bad = good.clone();
        bad[16..20].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(decode(&bad), Err(FormatError::BadHeader { offset: 16, .. })));
        let mut huge = good;
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode(&huge), Err(FormatError::Truncated { .. })));
    }
}
