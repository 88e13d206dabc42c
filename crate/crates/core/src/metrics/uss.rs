//! IQR-based robust normalization and the unified stability score.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::numeric::{quantile_sorted, sorted_copy};

/// Spreads below this are treated as a constant series.
pub const DEGENERATE_IQR: f64 = 1e-12;

/// Median and interquartile range of a reference series, used to map values
/// to `clip(0.5 + 0.25 (x - median) / IQR, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustScale {
    pub median: f64,
    pub iqr: f64,
}

impl RobustScale {
    /// Quartiles by linear interpolation at ranks `0.25 (n - 1)` and
    /// `0.75 (n - 1)`.
    pub fn fit(series: &[f64]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("cannot normalize an empty series"));
        }
        if series.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("series contains non-finite values"));
        }
        let sorted = sorted_copy(series.iter().copied());
        Ok(RobustScale {
            median: quantile_sorted(&sorted, 0.5),
            iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        })
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.iqr < DEGENERATE_IQR {
            0.5
        } else {
            (0.5 + 0.25 * (x - self.median) / self.iqr).clamp(0.0, 1.0)
        }
    }
}

/// Normalizes a series against its own median and IQR.
pub fn robust_normalize(series: &[f64]) -> Result<Vec<f64>> {
    let scale = RobustScale::fit(series)?;
    Ok(series.iter().map(|&x| scale.apply(x)).collect())
}

/// Component weights of the stability score.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UssWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for UssWeights {
    fn default() -> Self {
        UssWeights { alpha: 0.4, beta: 0.3, gamma: 0.3 }
    }
}

impl UssWeights {
    pub fn validate(&self) -> Result<()> {
        let unit = |w: f64| (0.0..=1.0).contains(&w);
        if !unit(self.alpha) || !unit(self.beta) || !unit(self.gamma) {
            return Err(Error::config("USS weights must each lie in [0, 1]"));
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("USS weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    pub fn combine(&self, wiou: f64, boundary_f: f64, persistence: f64) -> f64 {
        self.alpha * wiou + self.beta * boundary_f + self.gamma * persistence
    }
}

/// Raw per-frame inputs of the stability score for one object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UssInputs {
    pub wiou: Vec<f64>,
    pub boundary_f: Vec<f64>,
    /// Dropout indicators `D_t` in `{0, 1}`.
    pub dropout: Vec<f64>,
}

impl UssInputs {
    fn check(&self) -> Result<()> {
        let n = self.wiou.len();
        if self.boundary_f.len() != n || self.dropout.len() != n {
            return Err(Error::invalid(format!(
                "USS component lengths differ: {} / {} / {}",
                n,
                self.boundary_f.len(),
                self.dropout.len()
            )));
        }
        Ok(())
    }

    fn persistence(&self) -> Vec<f64> {
        self.dropout.iter().map(|d| 1.0 - d).collect()
    }
}

fn score(inputs: &UssInputs, scales: [RobustScale; 3], weights: &UssWeights) -> Vec<f64> {
    let persistence = inputs.persistence();
    (0..inputs.wiou.len())
        .map(|t| {
            weights.combine(
                scales[0].apply(inputs.wiou[t]),
                scales[1].apply(inputs.boundary_f[t]),
                scales[2].apply(persistence[t]),
            )
        })
        .collect()
}

/// Per-frame score with each component normalized against its own series.
pub fn uss_series(inputs: &UssInputs, weights: &UssWeights) -> Result<Vec<f64>> {
    inputs.check()?;
    weights.validate()?;
    let scales = [
        RobustScale::fit(&inputs.wiou)?,
        RobustScale::fit(&inputs.boundary_f)?,
        RobustScale::fit(&inputs.persistence())?,
    ];
    Ok(score(inputs, scales, weights))
}

/// Scores two runs with normalization statistics fitted on both runs'
/// frames pooled together.
pub fn uss_series_pooled(a: &UssInputs, b: &UssInputs, weights: &UssWeights) -> Result<(Vec<f64>, Vec<f64>)> {
    a.check()?;
    b.check()?;
    weights.validate()?;
    let pooled = |f: fn(&UssInputs) -> Vec<f64>| {
        let mut v = f(a);
        v.extend(f(b));
        RobustScale::fit(&v)
    };
    let scales = [pooled(|i| i.wiou.clone())?, pooled(|i| i.boundary_f.clone())?, pooled(UssInputs::persistence)?];
    Ok((score(a, scales, weights), score(b, scales, weights)))
}
