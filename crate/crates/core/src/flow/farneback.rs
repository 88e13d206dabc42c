//! Two-frame dense flow by polynomial expansion (Farnebäck).
//!
//! Both frames are expanded into local quadratics. A translation `d` maps
//! the linear coefficient as `b2 = b1 - 2 A d`, so with a prior estimate
//! `d0` every pixel contributes the constraint `A d = -(b2 - b1) / 2 + A d0`
//! where `b2` and `A2` are read at `x + d0`. The normal equations of these
//! constraints are averaged over a Gaussian window and solved per pixel.
//! Levels are processed coarse to fine, each seeded with the upsampled flow
//! of the level below.

use alloc::{format, vec, vec::Vec};

use crate::error::{Error, Result};
use crate::grid::{FlowField, GrayFrame};
use crate::numeric::{clamp_index, gaussian_taps};

use super::expansion::{expand, Expansion};
use super::pyramid;
use super::FlowParams;

/// Tikhonov weight pulling the solution towards the prior estimate where the
/// local structure tensor is degenerate (flat or one-dimensional texture).
/// Intensities are scaled to `[0, 1]` before expansion.
const PRIOR_WEIGHT: f64 = 1e-6;

/// Estimates the displacement field taking `prev` to `next`.
pub fn estimate_flow(prev: &GrayFrame, next: &GrayFrame, params: &FlowParams) -> Result<FlowField> {
    params.validate()?;
    crate::grid::same_dims(prev.dims(), next.dims())?;
    let (width, height) = prev.dims();
    if width < params.poly_neighborhood || height < params.poly_neighborhood {
        return Err(Error::invalid(format!(
            "frame {width}x{height} is smaller than the {n}x{n} expansion neighbourhood",
            n = params.poly_neighborhood
        )));
    }

    let scale = |f: &GrayFrame| f.data().iter().map(|v| v / 255.0).collect::<Vec<f64>>();
    let min_side = params.poly_neighborhood.max(2 * params.window_radius + 2);
    let dims = pyramid::level_dims(width, height, params.pyramid_levels, params.pyramid_scale, min_side);
    let prev_pyr = pyramid::build(&scale(prev), width, height, &dims);
    let next_pyr = pyramid::build(&scale(next), width, height, &dims);

    let poly_radius = params.poly_neighborhood / 2;
    let window = gaussian_taps(params.window_radius, window_sigma(params.window_radius));

    let mut flow: Option<(Vec<f64>, Vec<f64>, usize, usize)> = None;
    for level in (0..dims.len()).rev() {
        let (w, h) = dims[level];
        let (mut u, mut v) = match flow.take() {
            None => (vec![0.0; w * h], vec![0.0; w * h]),
            Some((u, v, cw, ch)) => {
                let sx = w as f64 / cw as f64;
                let sy = h as f64 / ch as f64;
                let u = pyramid::resize(&u, cw, ch, w, h).into_iter().map(|a| a * sx).collect();
                let v = pyramid::resize(&v, cw, ch, w, h).into_iter().map(|a| a * sy).collect();
                (u, v)
            }
        };
        let e1 = expand(&prev_pyr[level].data, w, h, poly_radius, params.poly_sigma);
        let e2 = expand(&next_pyr[level].data, w, h, poly_radius, params.poly_sigma);
        for _ in 0..params.iterations_per_level {
            update(&e1, &e2, &window, params.window_radius, &mut u, &mut v);
        }
        flow = Some((u, v, w, h));
    }
    let (u, v, _, _) = flow.expect("at least one pyramid level");
    FlowField::new(width, height, u, v)
}

fn window_sigma(radius: usize) -> f64 {
    // Applicability of the averaging window: the full window spans +-2 sigma.
    (radius as f64 / 2.0).max(0.5)
}

/// One refinement pass: builds the per-pixel normal equations from the
/// current estimate, averages them over the window and re-solves.
fn update(e1: &Expansion, e2: &Expansion, window: &[f64], radius: usize, u: &mut [f64], v: &mut [f64]) {
    let (w, h) = (e1.width, e1.height);
    let n = w * h;
    // Channels: G11, G12, G22, h1, h2 of A^T A d = A^T db.
    let mut ch = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (du, dv) = (u[i], v[i]);
            let q1 = e1.coeffs[i];
            let q2 = e2.sample(x as f64 + du, y as f64 + dv);
            let a11 = 0.5 * (q1.axx + q2.axx);
            let a22 = 0.5 * (q1.ayy + q2.ayy);
            let a12 = 0.25 * (q1.axy + q2.axy);
            let db1 = -0.5 * (q2.bx - q1.bx) + a11 * du + a12 * dv;
            let db2 = -0.5 * (q2.by - q1.by) + a12 * du + a22 * dv;
            ch[0][i] = a11 * a11 + a12 * a12;
            ch[1][i] = a12 * (a11 + a22);
            ch[2][i] = a12 * a12 + a22 * a22;
            ch[3][i] = a11 * db1 + a12 * db2;
            ch[4][i] = a12 * db1 + a22 * db2;
        }
    }
    for c in ch.iter_mut() {
        *c = box_gauss(c, w, h, window, radius);
    }
    for i in 0..n {
        let g11 = ch[0][i] + PRIOR_WEIGHT;
        let g12 = ch[1][i];
        let g22 = ch[2][i] + PRIOR_WEIGHT;
        let h1 = ch[3][i] + PRIOR_WEIGHT * u[i];
        let h2 = ch[4][i] + PRIOR_WEIGHT * v[i];
        let det = g11 * g22 - g12 * g12;
        if det > 0.0 {
            u[i] = (g22 * h1 - g12 * h2) / det;
            v[i] = (g11 * h2 - g12 * h1) / det;
        }
    }
}

/// Separable Gaussian filter; taps outside the grid are dropped.
fn box_gauss(data: &[f64], w: usize, h: usize, taps: &[f64], radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut tmp = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for (k, &g) in taps.iter().enumerate() {
                let xx = x as isize + k as isize - r;
                if xx >= 0 && (xx as usize) < w {
                    s += g * data[y * w + xx as usize];
                }
            }
            tmp[y * w + x] = s;
        }
    }
    let mut out = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for (k, &g) in taps.iter().enumerate() {
                let yy = y as isize + k as isize - r;
                if yy >= 0 && (yy as usize) < h {
                    s += g * tmp[clamp_index(yy, h) * w + x];
                }
            }
            out[y * w + x] = s;
        }
    }
    out
}
