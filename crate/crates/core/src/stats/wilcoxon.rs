use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, UqError};
use crate::rank::{average_ranks, tie_correction_sum};

/// Largest `n` (non-zero differences) for which `Auto` uses the exact distribution.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    /// Sum of ranks of positive differences `a − b`.
    pub w_plus: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with(a, b, WilcoxonMethod::Auto)
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied `|a − b|` share average ranks. The
/// exact branch counts sign assignments over the (possibly tied) ranks; the
/// normal branch uses continuity and tie corrections.
pub fn wilcoxon_signed_rank_with(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(UqError::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(UqError::InvalidArgument(format!("non-finite sample {v}")));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    let method = match method {
        WilcoxonMethod::Auto if n <= EXACT_MAX_N => WilcoxonMethod::Exact,
        WilcoxonMethod::Auto => WilcoxonMethod::Normal,
        m => m,
    };
    if n == 0 {
        return Ok(WilcoxonResult { n, w_plus: 0.0, p_value: 1.0, method });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let p_value = match method {
        WilcoxonMethod::Exact => exact_p(&ranks, w_plus),
        _ => normal_p(n, &abs, w_plus),
    };
    Ok(WilcoxonResult { n, w_plus, p_value: p_value.min(1.0), method })
}

/// Average ranks are multiples of 1/2, so doubled ranks are integers and the
/// null distribution of `2·W+` follows from a subset-sum count.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    // |2·(2W) − total| compares deviations from the null mean without halves
    let observed = (4 * (2.0 * w_plus).round() as i64 - 2 * total as i64).abs();
    let extreme: f64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (4 * s as i64 - 2 * total as i64).abs() >= observed)
        .map(|(_, c)| c)
        .sum();
    extreme / 2f64.powi(ranks.len() as i32)
}

fn normal_p(n: usize, abs: &[f64], w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_correction_sum(abs) / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * normal.sf(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.5, 0.3, 0.9, 0.2];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!((r.n, r.p_value), (0, 1.0));
    }

    #[test]
    fn all_positive_six() {
        let b = [0.0; 6];
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.w_plus, 21.0);
        assert_abs_diff_eq!(r.p_value, 2.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_differences_are_dropped() {
        let r =
            wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 7.0]).unwrap();
        assert_eq!(r.n, 6);
        assert_abs_diff_eq!(r.p_value, 0.03125, epsilon = 1e-15);
    }

    #[test]
    fn matches_scipy_normal_branch() {
        // scipy.stats.wilcoxon(d, method="approx", correction=True) with d = 1..=15, signs flipped at 2, 5, 9
        let d: Vec<f64> = (1..=15).map(|i| if [2, 5, 9].contains(&i) { -(i as f64) } else { i as f64 }).collect();
        let r = wilcoxon_signed_rank(&d, &[0.0; 15]).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Normal);
        assert_abs_diff_eq!(r.p_value, SCIPY_APPROX_P, epsilon = 1e-9);
    }

    const SCIPY_APPROX_P: f64 = 0.013_487_378_597_561_871;

    #[test]
    fn length_mismatch() {
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }
}
