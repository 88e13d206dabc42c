//! Inner boundaries, exact Euclidean distance transform and boundary F.

use alloc::{vec, vec::Vec};

use crate::error::Result;
use crate::grid::{same_dims, Mask};

/// Foreground pixels with at least one 4-neighbour in the background. The
/// region outside the grid counts as background.
pub fn extract_boundary(mask: &Mask) -> Mask {
    let (w, h) = mask.dims();
    let bg = |x: isize, y: isize| -> bool {
        x < 0 || y < 0 || x >= w as isize || y >= h as isize || !mask.get(x as usize, y as usize)
    };
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            mask.data()[i] && (bg(x - 1, y) || bg(x + 1, y) || bg(x, y - 1) || bg(x, y + 1))
        })
        .collect();
    Mask::new(w, h, data).expect("same dimensions as input")
}

/// Squared Euclidean distance from every pixel to the nearest `true` pixel
/// of `features` (Felzenszwalb-Huttenlocher lower envelope). Pixels are
/// `f64::INFINITY` when there are no features.
pub fn squared_distance_transform(features: &Mask) -> Vec<f64> {
    let (w, h) = features.dims();
    let mut grid: Vec<f64> = features.data().iter().map(|&f| if f { 0.0 } else { f64::INFINITY }).collect();
    let mut buf = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    for x in 0..w {
        for y in 0..h {
            buf[y] = grid[y * w + x];
        }
        transform_1d(&buf[..h], &mut out[..h]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        buf[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        transform_1d(&buf[..w], &mut out[..w]);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

fn transform_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(i) => i,
        None => {
            d.fill(f64::INFINITY);
            return;
        }
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        let mut s;
        loop {
            let p = v[k] as f64;
            s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            // z[0] is -inf, so this never underflows k.
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *out = (qf - p) * (qf - p) + f[v[k]];
    }
}

/// Boundary F-measure between two masks: a boundary pixel of one mask is
/// matched when the other boundary lies within `tolerance` pixels
/// (Euclidean).
pub fn boundary_f(m_t: &Mask, m_prev: &Mask, tolerance: f64) -> Result<f64> {
    same_dims(m_t.dims(), m_prev.dims())?;
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(crate::Error::invalid("boundary tolerance must be >= 0"));
    }
    let bt = extract_boundary(m_t);
    let bp = extract_boundary(m_prev);
    match (bt.is_blank(), bp.is_blank()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let tol2 = tolerance * tolerance;
    let matched_fraction = |from: &Mask, to: &Mask| {
        let dt = squared_distance_transform(to);
        let total = from.area();
        let hits = from.data().iter().zip(&dt).filter(|(&b, &d)| b && d <= tol2).count();
        hits as f64 / total as f64
    };
    let precision = matched_fraction(&bt, &bp);
    let recall = matched_fraction(&bp, &bt);
    if precision + recall == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * precision * recall / (precision + recall))
    }
}
