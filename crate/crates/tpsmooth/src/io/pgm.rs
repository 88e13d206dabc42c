//! Binary PGM (`P5`, maxval 255) for frames and masks.

use tpsmooth_core::{GrayFrame, Mask};

use super::{ensure_available, FormatError, Reader};

/// Raw 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn encode(img: &Gray8) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

fn is_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

/// Skips whitespace and `#` comments, then reads one decimal token.
/// Returns the value and the offset where its token starts.
fn header_number(bytes: &[u8], pos: &mut usize, name: &str) -> Result<(u64, usize), FormatError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(FormatError::Truncated { offset: bytes.len(), needed: 1 }),
            Some(&b) if is_space(b) => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                    *pos += 1;
                }
            }
            Some(_) => break,
        }
    }
    let start = *pos;
    let mut value: u64 = 0;
    while let Some(&b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as u64))
            .ok_or_else(|| FormatError::BadHeader { offset: start, reason: format!("{name} overflows") })?;
        *pos += 1;
    }
    if *pos == start {
        return Err(FormatError::BadHeader { offset: start, reason: format!("expected {name}") });
    }
    match bytes.get(*pos) {
        None => Err(FormatError::Truncated { offset: bytes.len(), needed: 1 }),
        Some(&b) if is_space(b) || b == b'#' => Ok((value, start)),
        Some(_) => Err(FormatError::BadHeader { offset: *pos, reason: format!("malformed {name}") }),
    }
}

pub fn decode(bytes: &[u8]) -> Result<Gray8, FormatError> {
    if bytes.len() < 2 {
        return Err(FormatError::Truncated { offset: bytes.len(), needed: 2 - bytes.len() });
    }
    if &bytes[..2] != b"P5" {
        return Err(FormatError::BadMagic { offset: 0, expected: "P5" });
    }
    let mut pos = 2;
    if bytes.get(pos).is_some_and(|&b| !is_space(b) && b != b'#') {
        return Err(FormatError::BadMagic { offset: 0, expected: "P5" });
    }
    let (width, _) = header_number(bytes, &mut pos, "width")?;
    let (height, _) = header_number(bytes, &mut pos, "height")?;
    let (maxval, maxval_at) = header_number(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::BadHeader { offset: maxval_at, reason: "zero dimension".into() });
    }
    if maxval != 255 {
        return Err(FormatError::Unsupported {
            offset: maxval_at,
            reason: format!("maxval {maxval}, only 255 is supported"),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !is_space(bytes[pos]) {
        return Err(FormatError::BadHeader { offset: pos, reason: "expected whitespace after maxval".into() });
    }
    pos += 1;
    let mut r = Reader::new(bytes);
    r.take(pos)?;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| FormatError::BadHeader { offset: 2, reason: "image too large".into() })?;
    ensure_available(&r, count)?;
    let pixels = r.take(count as usize)?.to_vec();
    r.finish()?;
    Ok(Gray8 { width: width as usize, height: height as usize, pixels })
}

pub fn encode_frame(frame: &GrayFrame) -> Vec<u8> {
    encode(&Gray8 { width: frame.width(), height: frame.height(), pixels: frame.to_u8() })
}

pub fn decode_frame(bytes: &[u8]) -> Result<GrayFrame, FormatError> {
    let img = decode(bytes)?;
    Ok(GrayFrame::from_u8(img.width, img.height, &img.pixels).expect("validated image"))
}

pub fn encode_mask(mask: &Mask) -> Vec<u8> {
    let pixels = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode(&Gray8 { width: mask.width(), height: mask.height(), pixels })
}

/// Masks must contain only 0 and 255.
pub fn decode_mask(bytes: &[u8]) -> Result<Mask, FormatError> {
    let img = decode(bytes)?;
    let raster_start = bytes.len() - img.pixels.len();
    let mut data = Vec::with_capacity(img.pixels.len());
    for (i, &p) in img.pixels.iter().enumerate() {
        match p {
            0 => data.push(false),
            255 => data.push(true),
            value => return Err(FormatError::NonBinaryMask { offset: raster_start + i, value }),
        }
    }
    Ok(Mask::new(img.width, img.height, data).expect("validated mask"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_layout() {
        let bytes = encode(&Gray8 { width: 2, height: 2, pixels: vec![1, 2, 3, 4] });
        assert_eq!(bytes, b"P5\n2 2\n255\n\x01\x02\x03\x04");
        assert_eq!(decode(&bytes).unwrap().pixels, vec![1, 2, 3, 4]);
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let bytes = b"P5 # made by hand\n# another\n2\t1 # w h\n255\n\x07\x08";
        let img = decode(bytes).unwrap();
        assert_eq!((img.width, img.height, img.pixels), (2, 1, vec![7, 8]));
    }

    #[test]
    fn rejections() {
        assert!(matches!(decode(b"P5\n1 1\n65535\n\0\0"), Err(FormatError::Unsupported { offset: 7, .. })));
        assert!(matches!(decode(b"P2\n1 1\n255\n0"), Err(FormatError::BadMagic { .. })));
        assert!(matches!(decode(b"P5\nx 1\n255\n0"), Err(FormatError::BadHeader { offset: 3, .. })));
        assert!(matches!(decode(b"P5\n1 1\n255\n\0\0"), Err(FormatError::TrailingData { .. })));
        assert!(matches!(
            decode_mask(b"P5\n2 1\n255\n\0\x80"),
            Err(FormatError::NonBinaryMask { offset: 12, value: 128 })
        ));
    }

    #[test]
    fn mask_round_trip() {
        let m = Mask::from_fn(5, 3, |x, y| (x + y) % 2 == 0).unwrap();
        assert_eq!(decode_mask(&encode_mask(&m)).unwrap(), m);
    }
}
