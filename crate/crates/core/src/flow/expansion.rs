//! Per-pixel quadratic polynomial expansion.
//!
//! Each neighbourhood is approximated by `f(p) ~ p^T A p + b^T p + c` in a
//! Gaussian-weighted least-squares sense. With full certainty the normal
//! equations have a constant Gram matrix, so the fit reduces to six
//! separable correlations followed by one fixed 6x6 linear map.

use alloc::{vec, vec::Vec};

use crate::numeric::{clamp_index, gaussian_taps};

/// Expansion coefficients at one pixel, in basis order `x, y, x^2, y^2, xy`.
/// The constant term is not needed for displacement estimation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Quadratic {
    pub bx: f64,
    pub by: f64,
    pub axx: f64,
    pub ayy: f64,
    pub axy: f64,
}

pub(crate) struct Expansion {
    pub width: usize,
    pub height: usize,
    pub coeffs: Vec<Quadratic>,
}

impl Expansion {
    /// Bilinear interpolation of the coefficients with clamp-to-edge.
    pub fn sample(&self, x: f64, y: f64) -> Quadratic {
        let x0f = libm::floor(x);
        let y0f = libm::floor(y);
        let fx = x - x0f;
        let fy = y - y0f;
        let (xi, yi) = (x0f as isize, y0f as isize);
        let x0 = clamp_index(xi, self.width);
        let x1 = clamp_index(xi + 1, self.width);
        let y0 = clamp_index(yi, self.height);
        let y1 = clamp_index(yi + 1, self.height);
        let w00 = (1.0 - fx) * (1.0 - fy);
        let w10 = fx * (1.0 - fy);
        let w01 = (1.0 - fx) * fy;
        let w11 = fx * fy;
        let c = |xx: usize, yy: usize| self.coeffs[yy * self.width + xx];
        let (a, b, d, e) = (c(x0, y0), c(x1, y0), c(x0, y1), c(x1, y1));
        let mix = |f: fn(&Quadratic) -> f64| w00 * f(&a) + w10 * f(&b) + w01 * f(&d) + w11 * f(&e);
        Quadratic {
            bx: mix(|q| q.bx),
            by: mix(|q| q.by),
            axx: mix(|q| q.axx),
            ayy: mix(|q| q.ayy),
            axy: mix(|q| q.axy),
        }
    }
}

/// Exponents `(a, b)` of the basis monomials `x^a y^b`.
const BASIS: [(u32, u32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)];

/// Computes the expansion of `img` over a `(2 radius + 1)^2` neighbourhood
/// with Gaussian applicability of standard deviation `sigma`.
pub(crate) fn expand(img: &[f64], width: usize, height: usize, radius: usize, sigma: f64) -> Expansion {
    let taps = gaussian_taps(radius, sigma);
    let r = radius as isize;
    let projection = projection_matrix(&taps, r);

    // Horizontal pass: moments of order 0..=2 in x.
    let n = width * height;
    let mut h = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for y in 0..height {
        let row = &img[y * width..(y + 1) * width];
        for x in 0..width {
            let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
            for (k, &g) in taps.iter().enumerate() {
                let off = k as isize - r;
                let v = g * row[clamp_index(x as isize + off, width)];
                let o = off as f64;
                m0 += v;
                m1 += v * o;
                m2 += v * o * o;
            }
            let i = y * width + x;
            h[0][i] = m0;
            h[1][i] = m1;
            h[2][i] = m2;
        }
    }

    let mut coeffs = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            // r_ab = sum_j g(j) j^b h_a(x, y + j)
            let mut moments = [0.0f64; 6];
            for (k, &g) in taps.iter().enumerate() {
                let off = k as isize - r;
                let yy = clamp_index(y as isize + off, height);
                let i = yy * width + x;
                let o = off as f64;
                let (h0, h1, h2) = (h[0][i], h[1][i], h[2][i]);
                moments[0] += g * h0;
                moments[1] += g * h1;
                moments[2] += g * o * h0;
                moments[3] += g * h2;
                moments[4] += g * o * o * h0;
                moments[5] += g * o * h1;
            }
            let mut c = [0.0f64; 6];
            for (row, out) in projection.iter().zip(c.iter_mut()) {
                *out = row.iter().zip(moments.iter()).map(|(p, m)| p * m).sum();
            }
            coeffs.push(Quadratic { bx: c[1], by: c[2], axx: c[3], ayy: c[4], axy: c[5] });
        }
    }
    Expansion { width, height, coeffs }
}

/// Inverse of the weighted Gram matrix of the six basis monomials.
fn projection_matrix(taps: &[f64], r: isize) -> [[f64; 6]; 6] {
    let mut gram = [[0.0f64; 6]; 6];
    for (ky, &gy) in taps.iter().enumerate() {
        for (kx, &gx) in taps.iter().enumerate() {
            let (x, y) = ((kx as isize - r) as f64, (ky as isize - r) as f64);
            let w = gx * gy;
            let phi = BASIS.map(|(a, b)| libm::pow(x, a as f64) * libm::pow(y, b as f64));
            for i in 0..6 {
                for j in 0..6 {
                    gram[i][j] += w * phi[i] * phi[j];
                }
            }
        }
    }
    invert6(gram)
}

/// Gauss-Jordan inversion with partial pivoting. The Gram matrix of a
/// quadratic basis over a window of radius >= 1 is positive definite.
fn invert6(mut m: [[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut inv = [[0.0f64; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..6 {
        let pivot = (col..6).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap_or(col);
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for j in 0..6 {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..6 {
            if i != col {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..6 {
                        m[i][j] -= f * m[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        // f(x, y) = 0.5 x^2 - 0.25 y^2 + 0.3 xy + 2x - y + 7, probed far from
        // the border so clamping never touches the window.
        let (w, h) = (21, 21);
        let (cx, cy) = (10.0, 10.0);
        let img: Vec<f64> = (0..w * h)
            .map(|i| {
                let x = (i % w) as f64 - cx;
                let y = (i / w) as f64 - cy;
                0.5 * x * x - 0.25 * y * y + 0.3 * x * y + 2.0 * x - y + 7.0
            })
            .collect();
        let e = expand(&img, w, h, 2, 1.1);
        let q = e.coeffs[10 * w + 10];
        assert!((q.axx - 0.5).abs() < 1e-9, "{q:?}");
        assert!((q.ayy + 0.25).abs() < 1e-9);
        assert!((q.axy - 0.3).abs() < 1e-9);
        assert!((q.bx - 2.0).abs() < 1e-9);
        assert!((q.by + 1.0).abs() < 1e-9);
        // One pixel to the right the linear term picks up 2 * axx + axy * y.
        let q = e.coeffs[10 * w + 11];
        assert!((q.bx - 3.0).abs() < 1e-9);
        assert!((q.by - (-1.0 + 0.3)).abs() < 1e-9);
    }

    #[test]
    fn invert_identity() {
        let mut id = [[0.0; 6]; 6];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 2.0;
        }
        let inv = invert6(id);
        assert!((inv[3][3] - 0.5).abs() < 1e-15);
    }
}
