//! Paired Wilcoxon signed-rank test.

use alloc::{format, vec, vec::Vec};

use crate::error::{Error, Result};

/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

/// Paired per-frame observations of two methods.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    baseline: Vec<f64>,
    enhanced: Vec<f64>,
}

impl PairedSample {
    pub fn new(baseline: Vec<f64>, enhanced: Vec<f64>) -> Result<Self> {
        if baseline.len() != enhanced.len() {
            return Err(Error::invalid(format!(
                "paired sample lengths differ: {} vs {}",
                baseline.len(),
                enhanced.len()
            )));
        }
        if baseline.is_empty() {
            return Err(Error::invalid("paired sample is empty"));
        }
        if baseline.iter().chain(&enhanced).any(|v| !v.is_finite()) {
            return Err(Error::invalid("paired sample contains non-finite values"));
        }
        Ok(PairedSample { baseline, enhanced })
    }

    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }

    pub fn enhanced(&self) -> &[f64] {
        &self.enhanced
    }

    /// `enhanced - baseline` per pair.
    pub fn differences(&self) -> Vec<f64> {
        self.enhanced.iter().zip(&self.baseline).map(|(e, b)| e - b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    Exact,
    /// Normal approximation with tie and continuity corrections.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub method: PValueMethod,
}

/// Average ranks of `|d|` (1-based), doubled so that they are integers.
fn doubled_ranks(abs: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let n = abs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| abs[a].total_cmp(&abs[b]));
    let mut ranks = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1 ..= j+1.
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// `P(T <= t)` for the doubled positive-rank sum `T` under random signs,
/// computed by counting sign patterns with a subset-sum table.
fn exact_lower_tail(doubled: &[u64], t: u64) -> f64 {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let hits: f64 = counts[..=(t.min(total) as usize)].iter().sum();
    hits / libm::pow(2.0, doubled.len() as f64)
}

/// Two-sided paired signed-rank test on `enhanced - baseline`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. The
/// exact null distribution is used up to [`EXACT_MAX_N`] nonzero pairs.
pub fn wilcoxon_signed_rank(sample: &PairedSample) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = sample.differences().into_iter().filter(|&d| d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Err(Error::UndefinedTest { n_total: sample.baseline.len() });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (doubled, ties) = doubled_ranks(&abs);
    let plus2: u64 = doubled.iter().zip(&diffs).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();
    let total2 = (n * (n + 1)) as u64;
    let minus2 = total2 - plus2;
    let w2 = plus2.min(minus2);
    let statistic = w2 as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_MAX_N {
        ((2.0 * exact_lower_tail(&doubled, w2)).min(1.0), PValueMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        // W <= mean, so the continuity correction moves it up by a half.
        let z = ((statistic - mean + 0.5).min(0.0)) / libm::sqrt(var);
        (libm::erfc(-z / core::f64::consts::SQRT_2).min(1.0), PValueMethod::Normal)
    };
    Ok(WilcoxonResult {
        statistic,
        w_plus: plus2 as f64 / 2.0,
        w_minus: minus2 as f64 / 2.0,
        p_value,
        n_effective: n,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn test(diffs: &[f64]) -> Result<WilcoxonResult> {
        wilcoxon_signed_rank(&PairedSample::new(vec![0.0; diffs.len()], diffs.to_vec()).unwrap())
    }

    #[test]
    fn five_positive_differences() {
        let r = test(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!((r.statistic, r.w_minus, r.w_plus), (0.0, 0.0, 15.0));
        assert_eq!(r.p_value, 0.0625);
        assert_eq!(r.method, PValueMethod::Exact);
    }

    #[test]
    fn symmetric_differences_give_one() {
        let r = test(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.statistic, 10.5);
    }

    #[test]
    fn thirty_positive_uses_normal_branch() {
        let d: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let r = test(&d).unwrap();
        assert_eq!(r.method, PValueMethod::Normal);
        assert!(r.p_value < 0.001);
        assert!(r.p_value > 0.0);
    }

    #[test]
    fn all_zero_is_undefined() {
        assert_eq!(test(&[0.0, 0.0, 0.0]), Err(Error::UndefinedTest { n_total: 3 }));
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(PairedSample::new(vec![1.0], vec![]).is_err());
        assert!(PairedSample::new(vec![], vec![]).is_err());
        assert!(PairedSample::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn ties_get_average_ranks() {
        let (r, ties) = doubled_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![7, 2, 7, 4]);
        assert_eq!(ties, vec![1, 1, 2]);
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn exact_and_normal_agree_at_twenty() {
        let mut s = 17u64;
        for _ in 0..20 {
            let d: Vec<f64> = (0..20).map(|_| lcg(&mut s) + 0.15).collect();
            let exact = test(&d).unwrap();
            let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
            let (_, ties) = doubled_ranks(&abs);
            let n = 20.0;
            let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0
                - ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
            let z = (exact.statistic - n * (n + 1.0) / 4.0 + 0.5).min(0.0) / var.sqrt();
            let approx = libm::erfc(-z / core::f64::consts::SQRT_2).min(1.0);
            assert!((exact.p_value - approx).abs() < 0.01, "{} vs {}", exact.p_value, approx);
        }
    }

    proptest! {
        #[test]
        fn negation_invariant(d in proptest::collection::vec(-5i32..=5, 1..30)) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            prop_assume!(d.iter().any(|&x| x != 0.0));
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            let (a, b) = (test(&d).unwrap(), test(&neg).unwrap());
            prop_assert_eq!(a.statistic, b.statistic);
            prop_assert_eq!(a.p_value, b.p_value);
        }

        #[test]
        fn zeros_are_dropped(d in proptest::collection::vec(-5i32..=5, 1..20), zeros in 0usize..5) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            prop_assume!(d.iter().any(|&x| x != 0.0));
            let mut padded = d.clone();
            padded.extend(core::iter::repeat_n(0.0, zeros));
            let filtered: Vec<f64> = d.iter().copied().filter(|&x| x != 0.0).collect();
            let (a, b) = (test(&padded).unwrap(), test(&filtered).unwrap());
            prop_assert_eq!(a.statistic, b.statistic);
            prop_assert_eq!(a.p_value, b.p_value);
            prop_assert_eq!(a.n_effective, b.n_effective);
        }

        #[test]
        fn p_in_unit_interval(d in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            prop_assume!(d.iter().any(|&x| x != 0.0));
            let r = test(&d).unwrap();
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }
    }
}
