//! Dense motion: flow estimation, backward warping, forward-backward cycle
//! residual and the motion-uncertainty map derived from it.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::grid::{same_dims, FlowField, ScalarField};
use crate::numeric::median;

mod expansion;
mod farneback;
mod pyramid;
pub(crate) mod sample;

pub use farneback::estimate_flow;

/// Parameters of the polynomial-expansion flow estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlowParams {
    pub pyramid_levels: usize,
    /// Size ratio between consecutive pyramid levels, in `(0, 1)`.
    pub pyramid_scale: f64,
    /// Radius of the Gaussian averaging window for the displacement
    /// equations.
    pub window_radius: usize,
    pub iterations_per_level: usize,
    /// Side of the (odd) polynomial-expansion neighbourhood.
    pub poly_neighborhood: usize,
    pub poly_sigma: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            pyramid_levels: 5,
            pyramid_scale: 0.5,
            window_radius: 7,
            iterations_per_level: 3,
            poly_neighborhood: 5,
            poly_sigma: 1.1,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if self.pyramid_levels < 1 {
            return Err(Error::config("pyramid_levels must be >= 1"));
        }
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return Err(Error::config(format!("pyramid_scale {} must lie in (0, 1)", self.pyramid_scale)));
        }
        if self.window_radius < 1 {
            return Err(Error::config("window_radius must be >= 1"));
        }
        if self.iterations_per_level < 1 {
            return Err(Error::config("iterations_per_level must be >= 1"));
        }
        if self.poly_neighborhood < 3 || self.poly_neighborhood.is_multiple_of(2) {
            return Err(Error::config(format!("poly_neighborhood {} must be odd and >= 3", self.poly_neighborhood)));
        }
        if !(self.poly_sigma > 0.0 && self.poly_sigma.is_finite()) {
            return Err(Error::config("poly_sigma must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionUncertaintyParams {
    /// Lower bound on the Gaussian scale, in pixels.
    pub sigma_floor: f64,
    /// Use `max(median residual, sigma_floor)` as the scale instead of the
    /// floor alone.
    pub use_adaptive_sigma: bool,
}

impl Default for MotionUncertaintyParams {
    fn default() -> Self {
        MotionUncertaintyParams { sigma_floor: 0.5, use_adaptive_sigma: true }
    }
}

impl MotionUncertaintyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(Error::config(format!("sigma_floor {} must be > 0", self.sigma_floor)));
        }
        Ok(())
    }
}

/// Samples `field` at `x - flow(x)` for every pixel `x`.
///
/// A sample whose bilinear support is not fully inside the grid is zero.
pub fn warp_backward(field: &ScalarField, flow: &FlowField) -> Result<ScalarField> {
    same_dims(field.dims(), flow.dims())?;
    let (w, h) = field.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (du, dv) = flow.at(x, y);
            let v = sample::bilinear_strict(field.data(), w, h, x as f64 - du, y as f64 - dv);
            out.push(v.unwrap_or(0.0));
        }
    }
    Ok(ScalarField::from_raw(w, h, out))
}

/// Forward-backward cycle residual `|fwd(x) + bwd(x + fwd(x))|` in pixels.
/// The backward field is read bilinearly with clamp-to-edge.
pub fn flow_residual(fwd: &FlowField, bwd: &FlowField) -> Result<ScalarField> {
    same_dims(fwd.dims(), bwd.dims())?;
    let (w, h) = fwd.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (fu, fv) = fwd.at(x, y);
            let (sx, sy) = (x as f64 + fu, y as f64 + fv);
            let bu = sample::bilinear_clamped(bwd.u(), w, h, sx, sy);
            let bv = sample::bilinear_clamped(bwd.v(), w, h, sx, sy);
            out.push(libm::hypot(fu + bu, fv + bv));
        }
    }
    Ok(ScalarField::from_raw(w, h, out))
}

/// `1 - exp(-e^2 / (2 sigma^2))` for a single residual.
#[inline]
pub fn motion_uncertainty_value(residual: f64, sigma: f64) -> f64 {
    1.0 - libm::exp(-(residual * residual) / (2.0 * sigma * sigma))
}

/// Gaussian scale used for a residual map under `params`.
pub fn residual_sigma(residual: &ScalarField, params: &MotionUncertaintyParams) -> f64 {
    if params.use_adaptive_sigma {
        let m = median(residual.data().iter().copied()).unwrap_or(0.0);
        m.max(params.sigma_floor)
    } else {
        params.sigma_floor
    }
}

/// Maps a cycle-residual map to motion uncertainty in `[0, 1)`.
pub fn motion_uncertainty(residual: &ScalarField, params: &MotionUncertaintyParams) -> Result<ScalarField> {
    params.validate()?;
    if let Some(i) = residual.data().iter().position(|&e| e < 0.0) {
        return Err(Error::invalid(format!("negative residual at index {i}")));
    }
    let sigma = residual_sigma(residual, params);
    Ok(ScalarField::from_raw(
        residual.width(),
        residual.height(),
        residual.data().iter().map(|&e| motion_uncertainty_value(e, sigma)).collect(),
    ))
}

/// Mean per-pixel Euclidean flow magnitude.
pub fn mean_flow_magnitude(flow: &FlowField) -> f64 {
    let sum: f64 = flow.u().iter().zip(flow.v()).map(|(&a, &b)| libm::hypot(a, b)).sum();
    sum / flow.u().len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn zero_flow_warp_is_identity() {
        let f = ScalarField::from_fn(7, 5, |x, y| (x * 31 + y * 7) as f64 / 100.0).unwrap();
        let out = warp_backward(&f, &FlowField::zeros(7, 5).unwrap()).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn warp_hand_bilinear_example() {
        let f = ScalarField::new(2, 1, vec![0.25, 0.75]).unwrap();
        let flow = FlowField::new(2, 1, vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let out = warp_backward(&f, &flow).unwrap();
        assert_eq!(out.data(), &[0.25, 0.25]);
        // Half-pixel shift blends both taps.
        let flow = FlowField::new(2, 1, vec![0.0, 0.5], vec![0.0, 0.0]).unwrap();
        assert_eq!(warp_backward(&f, &flow).unwrap().data(), &[0.25, 0.5]);
    }

    #[test]
    fn warp_out_of_bounds_is_zero() {
        let f = ScalarField::filled(4, 4, 0.9).unwrap();
        let out = warp_backward(&f, &FlowField::constant(4, 4, 10.0, 0.0).unwrap()).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
        // Partial support counts as outside.
        let out = warp_backward(&f, &FlowField::constant(4, 4, 0.5, 0.0).unwrap()).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
        assert_eq!(out.get(1, 0), 0.9);
    }

    #[test]
    fn warp_rejects_shape_mismatch() {
        let f = ScalarField::filled(4, 4, 0.5).unwrap();
        let flow = FlowField::zeros(4, 3).unwrap();
        assert!(matches!(warp_backward(&f, &flow), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn residual_examples() {
        let c = |u, v| FlowField::constant(6, 6, u, v).unwrap();
        let r = flow_residual(&c(1.5, -0.5), &c(-1.5, 0.5)).unwrap();
        assert!(r.data().iter().all(|&e| e.abs() < 1e-12));
        let r = flow_residual(&c(2.0, 0.0), &c(-1.0, 0.0)).unwrap();
        assert!(r.data().iter().all(|&e| (e - 1.0).abs() < 1e-12));
        let r = flow_residual(&c(3.0, 4.0), &c(0.0, 0.0)).unwrap();
        assert!(r.data().iter().all(|&e| (e - 5.0).abs() < 1e-12));
        assert!(flow_residual(&c(0.0, 0.0), &FlowField::zeros(5, 6).unwrap()).is_err());
    }

    #[test]
    fn motion_uncertainty_examples() {
        let sigma = 0.8;
        let params = MotionUncertaintyParams { sigma_floor: sigma, use_adaptive_sigma: false };
        let r = ScalarField::new(3, 1, vec![0.0, sigma, 3.0 * sigma]).unwrap();
        let q = motion_uncertainty(&r, &params).unwrap();
        assert_eq!(q.data()[0], 0.0);
        // 1 - e^(-1/2) and 1 - e^(-9/2), mpmath at 30 digits.
        assert!((q.data()[1] - 0.393_469_340_287_366_6).abs() < 1e-12);
        assert!((q.data()[2] - 0.988_891_003_461_757_7).abs() < 1e-12);
    }

    #[test]
    fn adaptive_sigma_uses_median_with_floor() {
        let p = MotionUncertaintyParams::default();
        let zero = ScalarField::filled(4, 4, 0.0).unwrap();
        assert_eq!(residual_sigma(&zero, &p), 0.5);
        let r = ScalarField::new(3, 1, vec![1.0, 2.0, 9.0]).unwrap();
        assert_eq!(residual_sigma(&r, &p), 2.0);
        let q = motion_uncertainty(&r, &p).unwrap();
        assert!((q.data()[1] - 0.393_469_340_287_366_6).abs() < 1e-12);
        assert!(motion_uncertainty(&ScalarField::filled(1, 1, -1.0).unwrap(), &p).is_err());
    }

    #[test]
    fn flow_magnitude_examples() {
        assert_eq!(mean_flow_magnitude(&FlowField::zeros(3, 3).unwrap()), 0.0);
        assert_eq!(mean_flow_magnitude(&FlowField::constant(3, 3, 3.0, 4.0).unwrap()), 5.0);
        let half = FlowField::from_fn(4, 2, |x, _| if x < 2 { (1.0, 0.0) } else { (0.0, 0.0) }).unwrap();
        assert_eq!(mean_flow_magnitude(&half), 0.5);
    }

    #[test]
    fn params_validate() {
        assert!(FlowParams::default().validate().is_ok());
        let bad = FlowParams { poly_neighborhood: 4, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = FlowParams { pyramid_scale: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(MotionUncertaintyParams { sigma_floor: 0.0, use_adaptive_sigma: true }.validate().is_err());
    }

    proptest! {
        #[test]
        fn motion_uncertainty_is_monotone_and_bounded(a in 0.0f64..50.0, b in 0.0f64..50.0, sigma in 0.05f64..5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (ql, qh) = (motion_uncertainty_value(lo, sigma), motion_uncertainty_value(hi, sigma));
            prop_assert!(ql <= qh);
            prop_assert!((0.0..1.0).contains(&ql) || ql == 1.0 && lo / sigma > 8.0);
        }

        #[test]
        fn warp_keeps_probabilities_in_range(
            vals in proptest::collection::vec(0.0f64..=1.0, 36),
            flows in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 36),
        ) {
            let f = ScalarField::new(6, 6, vals).unwrap();
            let flow = FlowField::new(6, 6, flows.iter().map(|p| p.0).collect(), flows.iter().map(|p| p.1).collect()).unwrap();
            let out = warp_backward(&f, &flow).unwrap();
            prop_assert!(out.is_probability());
        }

        #[test]
        fn negated_constant_flow_has_zero_residual(u in -4.0f64..4.0, v in -4.0f64..4.0) {
            let f = FlowField::constant(12, 12, u, v).unwrap();
            let r = flow_residual(&f, &f.negated()).unwrap();
            prop_assert!(r.data().iter().all(|&e| e.abs() < 1e-12));
        }
    }
}
