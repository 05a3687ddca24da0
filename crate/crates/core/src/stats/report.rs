use serde::{Deserialize, Serialize};

use super::friedman::friedman_test;
use super::holm::holm_adjust;
use super::wilcoxon::wilcoxon_signed_rank;
use crate::error::{Result, UqError};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Rows are cells (datasets, folds), columns are treatments (measures).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    treatments: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(treatments: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if treatments.len() < 2 {
            return Err(UqError::InvalidArgument(format!("need at least 2 treatments, got {}", treatments.len())));
        }
        if rows.len() < 2 {
            return Err(UqError::InvalidArgument(format!("need at least 2 rows, got {}", rows.len())));
        }
        for row in &rows {
            if row.len() != treatments.len() {
                return Err(UqError::DimensionMismatch { expected: treatments.len(), actual: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(UqError::InvalidArgument(format!("non-finite score {v}")));
            }
        }
        Ok(Self { treatments, rows })
    }

    pub fn treatments(&self) -> &[String] {
        &self.treatments
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_treatments(&self) -> usize {
        self.treatments.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub treatments: Vec<String>,
    pub n_rows: usize,
    pub alpha: f64,
    pub friedman_stat: f64,
    pub friedman_p: f64,
    pub avg_ranks: Vec<f64>,
    /// Empty unless the Friedman test rejects at `alpha`.
    pub pairwise: Vec<PairwiseComparison>,
    /// Maximal runs of rank-adjacent treatments with no significant pair inside
    /// (the bars of a critical-difference diagram).
    pub groups: Vec<Vec<String>>,
}

impl TestReport {
    pub fn friedman_significant(&self) -> bool {
        self.friedman_p < self.alpha
    }
}

/// Friedman test, then Holm-adjusted pairwise Wilcoxon tests when it rejects.
pub fn compare_treatments(m: &ScoreMatrix, alpha: f64) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(UqError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let friedman = friedman_test(m);
    let t = m.n_treatments();
    let mut pairwise = Vec::new();
    if friedman.p_value < alpha {
        let pairs: Vec<(usize, usize)> = (0..t).flat_map(|i| (i + 1..t).map(move |j| (i, j))).collect();
        let raw = pairs
            .iter()
            .map(|&(i, j)| wilcoxon_signed_rank(&m.column(i), &m.column(j)).map(|w| w.p_value))
            .collect::<Result<Vec<_>>>()?;
        let adjusted = holm_adjust(&raw)?;
        pairwise = pairs
            .iter()
            .zip(raw.iter().zip(&adjusted))
            .map(|(&(i, j), (&raw_p, &adjusted_p))| PairwiseComparison {
                a: m.treatments[i].clone(),
                b: m.treatments[j].clone(),
                raw_p,
                adjusted_p,
                significant: adjusted_p <= alpha,
            })
            .collect();
    }

    let mut by_rank: Vec<usize> = (0..t).collect();
    by_rank.sort_by(|&a, &b| friedman.avg_ranks[a].total_cmp(&friedman.avg_ranks[b]));
    let differs = |i: usize, j: usize| {
        pairwise.iter().any(|p| {
            p.significant
                && ((p.a == m.treatments[i] && p.b == m.treatments[j])
                    || (p.a == m.treatments[j] && p.b == m.treatments[i]))
        })
    };
    let mut groups = Vec::new();
    let mut last_end = 0;
    for start in 0..t {
        let mut end = start;
        while end + 1 < t && (start..=end).all(|x| !differs(by_rank[x], by_rank[end + 1])) {
            end += 1;
        }
        if end > start && end > last_end {
            groups.push(by_rank[start..=end].iter().map(|&i| m.treatments[i].clone()).collect());
            last_end = end;
        }
    }

    Ok(TestReport {
        treatments: m.treatments.clone(),
        n_rows: m.n_rows(),
        alpha,
        friedman_stat: friedman.statistic,
        friedman_p: friedman.p_value,
        avg_ranks: friedman.avg_ranks,
        pairwise,
        groups,
    })
}
