//! Nonparametric comparison of several treatments (uncertainty measures) over
//! many cells (datasets): Friedman omnibus test, pairwise Wilcoxon signed-rank
//! tests with Holm's step-down adjustment, and average ranks for
//! critical-difference reporting.

mod friedman;
mod holm;
mod report;
mod wilcoxon;

pub use friedman::{friedman_test, FriedmanResult};
pub use holm::holm_adjust;
pub use report::{compare_treatments, PairwiseComparison, ScoreMatrix, TestReport, DEFAULT_ALPHA};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N};
