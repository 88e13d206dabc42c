//! Image pyramid: 5-tap binomial blur followed by bilinear resize.

use alloc::{vec, vec::Vec};

use crate::numeric::clamp_index;

use super::sample::bilinear_clamped;

#[derive(Debug, Clone)]
pub(crate) struct Level {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

const BINOMIAL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

pub(crate) fn blur5(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            tmp[y * width + x] = BINOMIAL
                .iter()
                .enumerate()
                .map(|(k, w)| w * data[y * width + clamp_index(x as isize + k as isize - 2, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = BINOMIAL
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[clamp_index(y as isize + k as isize - 2, height) * width + x])
                .sum();
        }
    }
    out
}

/// Pixel-centre aligned bilinear resize.
pub(crate) fn resize(data: &[f64], width: usize, height: usize, new_width: usize, new_height: usize) -> Vec<f64> {
    let sx = width as f64 / new_width as f64;
    let sy = height as f64 / new_height as f64;
    let mut out = Vec::with_capacity(new_width * new_height);
    for y in 0..new_height {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..new_width {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            out.push(bilinear_clamped(data, width, height, src_x, src_y));
        }
    }
    out
}

/// Dimensions of every level, finest first. A level is kept only while
/// both sides stay at or above `min_side`; level 0 is always present.
pub(crate) fn level_dims(
    width: usize,
    height: usize,
    levels: usize,
    scale: f64,
    min_side: usize,
) -> Vec<(usize, usize)> {
    let mut dims = vec![(width, height)];
    let mut factor = 1.0;
    for _ in 1..levels {
        factor *= scale;
        let w = libm::round(width as f64 * factor) as usize;
        let h = libm::round(height as f64 * factor) as usize;
        if w < min_side || h < min_side {
            break;
        }
        dims.push((w, h));
    }
    dims
}

pub(crate) fn build(data: &[f64], width: usize, height: usize, dims: &[(usize, usize)]) -> Vec<Level> {
    let mut levels = Vec::with_capacity(dims.len());
    levels.push(Level { width, height, data: data.to_vec() });
    for &(w, h) in &dims[1..] {
        let prev = levels.last().expect("level 0 pushed above");
        let blurred = blur5(&prev.data, prev.width, prev.height);
        let data = resize(&blurred, prev.width, prev.height, w, h);
        levels.push(Level { width: w, height: h, data });
    }
    levels
}
