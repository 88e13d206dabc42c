//! Small numeric helpers shared across modules.

use alloc::vec::Vec;

/// Quantile by linear interpolation between order statistics, rank
/// `q * (n - 1)`. `sorted` must be ascending and nonempty.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(rank) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted_copy(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let sorted = sorted_copy(values);
    if sorted.is_empty() {
        None
    } else {
        Some(quantile_sorted(&sorted, 0.5))
    }
}

/// Sampled, unnormalized 1-D Gaussian taps for offsets `-radius..=radius`.
pub(crate) fn gaussian_taps(radius: usize, sigma: f64) -> Vec<f64> {
    let r = radius as isize;
    (-r..=r).map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma))).collect()
}

#[inline]
pub(crate) fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(median([5.0]), Some(5.0));
        assert_eq!(median([]), None);
    }
}
