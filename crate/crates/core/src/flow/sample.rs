//! Bilinear sampling on row-major planes.

use crate::numeric::clamp_index;

/// Bilinear sample at `(x, y)` that requires every tap with nonzero weight
/// to lie inside the grid. Returns `None` when any such tap falls outside.
///
/// Integer coordinates only touch a single tap, so a sample at an exact
/// pixel position on the last row or column is still valid.
#[inline]
pub(crate) fn bilinear_strict(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> Option<f64> {
    let x0f = libm::floor(x);
    let y0f = libm::floor(y);
    let fx = x - x0f;
    let fy = y - y0f;
    if x0f < 0.0 || y0f < 0.0 {
        return None;
    }
    let (x0, y0) = (x0f as usize, y0f as usize);
    let need_x1 = fx > 0.0;
    let need_y1 = fy > 0.0;
    if x0 >= width || y0 >= height || (need_x1 && x0 + 1 >= width) || (need_y1 && y0 + 1 >= height) {
        return None;
    }
    let at = |xx: usize, yy: usize| data[yy * width + xx];
    let a = at(x0, y0);
    if !need_x1 && !need_y1 {
        return Some(a);
    }
    let top = if need_x1 { lerp(a, at(x0 + 1, y0), fx) } else { a };
    if !need_y1 {
        return Some(top);
    }
    let c = at(x0, y0 + 1);
    let bottom = if need_x1 { lerp(c, at(x0 + 1, y0 + 1), fx) } else { c };
    Some(lerp(top, bottom, fy))
}

/// Bilinear sample with clamp-to-edge addressing.
#[inline]
pub(crate) fn bilinear_clamped(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    let x0f = libm::floor(x);
    let y0f = libm::floor(y);
    let fx = x - x0f;
    let fy = y - y0f;
    let (xi, yi) = (x0f as isize, y0f as isize);
    let x0 = clamp_index(xi, width);
    let x1 = clamp_index(xi + 1, width);
    let y0 = clamp_index(yi, height);
    let y1 = clamp_index(yi + 1, height);
    let at = |xx: usize, yy: usize| data[yy * width + xx];
    let top = lerp(at(x0, y0), at(x1, y0), fx);
    let bottom = lerp(at(x0, y1), at(x1, y1), fx);
    lerp(top, bottom, fy)
}

/// `a + t (b - a)`, kept inside `[min(a, b), max(a, b)]` under rounding.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + t * (b - a);
    if a <= b {
        v.clamp(a, b)
    } else {
        v.clamp(b, a)
    }
}
