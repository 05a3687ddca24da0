use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::report::ScoreMatrix;
use crate::rank::{average_ranks, tie_correction_sum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean within-row rank per treatment; the highest score in a row gets rank 1.
    pub avg_ranks: Vec<f64>,
}

/// Tie-corrected Friedman chi-square test with `T − 1` degrees of freedom.
pub fn friedman_test(m: &ScoreMatrix) -> FriedmanResult {
    let n = m.n_rows() as f64;
    let t = m.n_treatments() as f64;
    let mut rank_sums = vec![0.0; m.n_treatments()];
    let mut ties = 0.0;
    for row in m.rows() {
        let negated: Vec<f64> = row.iter().map(|v| -v).collect();
        for (sum, r) in rank_sums.iter_mut().zip(average_ranks(&negated)) {
            *sum += r;
        }
        ties += tie_correction_sum(row);
    }
    let avg_ranks = rank_sums.iter().map(|r| r / n).collect();

    let denominator = 1.0 - ties / (n * t * (t * t - 1.0));
    if denominator <= 1e-12 {
        // every row constant
        return FriedmanResult { statistic: 0.0, p_value: 1.0, avg_ranks };
    }
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (n * t * (t + 1.0)) * sum_sq - 3.0 * n * (t + 1.0);
    let statistic = (raw / denominator).max(0.0);
    let chi2 = ChiSquared::new(t - 1.0).expect("at least two treatments");
    FriedmanResult { statistic, p_value: chi2.sf(statistic).clamp(0.0, 1.0), avg_ranks }
}
