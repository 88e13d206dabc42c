//! In-run invariant checks for smoothing.

use tpsmooth_core::smoother::{FusionMode, FusionParams, StepDiagnostics};
use tpsmooth_core::ScalarField;

/// `min(a, b) <= v <= max(a, b)`, allowing one ulp at either end.
pub fn within_hull(v: f64, a: f64, b: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    v >= lo.next_down() && v <= hi.next_up()
}

/// Checks convexity of every refined pixel and the bounds of `K`.
pub fn check_step(
    current: &[ScalarField],
    refined: &[ScalarField],
    diag: &StepDiagnostics,
    fusion: &FusionParams,
) -> Result<(), String> {
    let t = diag.frame_index;
    if diag.warped_priors.is_empty() {
        // First frame or passthrough: output equals input.
        if current != refined {
            return Err(format!("frame {t}: refined differs from input without a prior"));
        }
        return Ok(());
    }
    for (k, ((cur, out), prior)) in current.iter().zip(refined).zip(&diag.warped_priors).enumerate() {
        for (i, ((&p, &r), &w)) in cur.data().iter().zip(out.data()).zip(prior.data()).enumerate() {
            if !within_hull(r, p, w) {
                return Err(format!("frame {t} object {k} pixel {i}: {r} outside [{p}, {w}]"));
            }
        }
    }
    if fusion.mode != FusionMode::Passthrough {
        for (k, blend) in diag.blend.iter().enumerate() {
            if let Some(v) = blend.data().iter().find(|&&v| v < fusion.kappa_min || v > fusion.kappa_max) {
                return Err(format!(
                    "frame {t} object {k}: K = {v} outside [{}, {}]",
                    fusion.kappa_min, fusion.kappa_max
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_allows_one_ulp() {
        assert!(within_hull(0.5, 0.2, 0.5));
        assert!(within_hull(0.5f64.next_up(), 0.2, 0.5));
        assert!(!within_hull(0.5f64.next_up().next_up(), 0.2, 0.5));
        assert!(within_hull(0.3, 0.5, 0.2));
    }
}
