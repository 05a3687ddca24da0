//! Rejection curves and prediction-rejection ratios.
//!
//! Curves are evaluated on the per-instance grid `r = i/N`, `i = 0..=N`: the `i`
//! highest-ranked instances are rejected and, under the default accounting,
//! answered correctly by an oracle, so the curve value is the summed error of
//! the retained instances divided by `N`.

use serde::{Deserialize, Serialize};

use super::metrics::ErrorMetric;
use super::record::PredictionRecord;
use crate::error::{Result, UqError};
use crate::measures::{MeasureKind, UncertaintyKind};

/// Oracle areas at or below this count as zero.
const AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionOrder {
    /// Reject by descending uncertainty score.
    Uncertainty,
    /// Reject by descending per-instance error.
    Oracle,
    /// Expected curve under uniformly random rejection: a straight line from the
    /// full-set value at `r = 0` to `0` at `r = 1`.
    RandomAnalytic,
}

/// What the curve value means once instances are rejected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accounting {
    /// Rejected instances count as error-free; value = retained error sum / N.
    #[default]
    OracleZero,
    /// Metric over the retained instances only; `0` once nothing is retained.
    RetainedOnly,
}

/// Which uncertainty value ranks instances for rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScoreSource {
    pub measure: MeasureKind,
    pub kind: UncertaintyKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCurve {
    pub fractions: Vec<f64>,
    pub values: Vec<f64>,
    pub metric: ErrorMetric,
    pub ordering: RejectionOrder,
    pub accounting: Accounting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrrResult {
    pub ar_unc: f64,
    pub ar_orc: f64,
    pub prr: f64,
}

/// Indices sorted by `keys` descending; equal keys keep index order.
fn descending_order(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    order
}

fn rejection_values(errors: &[f64], order: &[usize], accounting: Accounting) -> Vec<f64> {
    let n = errors.len();
    let total: f64 = errors.iter().sum();
    let mut values = Vec::with_capacity(n + 1);
    let mut removed = 0.0;
    for i in 0..=n {
        if i > 0 {
            removed += errors[order[i - 1]];
        }
        // clamp the running difference; it can dip below zero by an ulp
        let retained = (total - removed).max(0.0);
        values.push(match accounting {
            Accounting::OracleZero => retained / n as f64,
            Accounting::RetainedOnly if i == n => 0.0,
            Accounting::RetainedOnly => retained / (n - i) as f64,
        });
    }
    values
}

fn check_inputs(errors: &[f64], scores: &[f64]) -> Result<()> {
    if errors.len() < 2 {
        return Err(UqError::InvalidArgument(format!(
            "rejection curves need at least 2 instances, got {}",
            errors.len()
        )));
    }
    if scores.len() != errors.len() {
        return Err(UqError::DimensionMismatch { expected: errors.len(), actual: scores.len() });
    }
    if let Some(v) = errors.iter().chain(scores).find(|v| !v.is_finite()) {
        return Err(UqError::InvalidArgument(format!("non-finite error or score {v}")));
    }
    Ok(())
}

/// Curve from raw per-instance errors and scores.
pub fn rejection_curve_from_scores(
    errors: &[f64],
    scores: &[f64],
    metric: ErrorMetric,
    ordering: RejectionOrder,
    accounting: Accounting,
) -> Result<RejectionCurve> {
    check_inputs(errors, scores)?;
    let n = errors.len();
    let fractions: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let values = match ordering {
        RejectionOrder::Uncertainty => rejection_values(errors, &descending_order(scores), accounting),
        RejectionOrder::Oracle => rejection_values(errors, &descending_order(errors), accounting),
        RejectionOrder::RandomAnalytic => {
            let start = errors.iter().sum::<f64>() / n as f64;
            fractions.iter().map(|r| start * (1.0 - r)).collect()
        }
    };
    Ok(RejectionCurve { fractions, values, metric, ordering, accounting })
}

fn errors_and_scores(
    records: &[PredictionRecord],
    metric: ErrorMetric,
    score: ScoreSource,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if records.is_empty() {
        return Err(UqError::EmptyInput("prediction records"));
    }
    let errors = records.iter().map(|r| metric.instance_error(r)).collect();
    let scores = records.iter().map(|r| r.score(score.measure, score.kind)).collect::<Result<_>>()?;
    Ok((errors, scores))
}

pub fn rejection_curve(
    records: &[PredictionRecord],
    metric: ErrorMetric,
    ordering: RejectionOrder,
    score: ScoreSource,
    accounting: Accounting,
) -> Result<RejectionCurve> {
    let (errors, scores) = errors_and_scores(records, metric, score)?;
    rejection_curve_from_scores(&errors, &scores, metric, ordering, accounting)
}

/// Trapezoidal area of `upper − lower` over a uniform grid on `[0, 1]`.
fn area_between(upper: &[f64], lower: &[f64]) -> f64 {
    let h = 1.0 / (upper.len() - 1) as f64;
    let d: Vec<f64> = upper.iter().zip(lower).map(|(u, l)| u - l).collect();
    d.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum()
}

/// PRR from raw per-instance errors and uncertainty scores.
pub fn prr_from_scores(errors: &[f64], scores: &[f64]) -> Result<PrrResult> {
    let curve = |ordering| {
        rejection_curve_from_scores(errors, scores, ErrorMetric::Mcr, ordering, Accounting::OracleZero)
            .map(|c| c.values)
    };
    let random = curve(RejectionOrder::RandomAnalytic)?;
    let unc = curve(RejectionOrder::Uncertainty)?;
    let orc = curve(RejectionOrder::Oracle)?;
    let ar_unc = area_between(&random, &unc);
    let ar_orc = area_between(&random, &orc);
    if ar_orc <= AREA_EPS {
        return Err(UqError::UndefinedPrr { ar_orc });
    }
    Ok(PrrResult { ar_unc, ar_orc, prr: ar_unc / ar_orc })
}

pub fn prr(records: &[PredictionRecord], metric: ErrorMetric, score: ScoreSource) -> Result<PrrResult> {
    let (errors, scores) = errors_and_scores(records, metric, score)?;
    prr_from_scores(&errors, &scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const ERRORS: [f64; 4] = [1.0, 0.0, 1.0, 0.0];
    const SCORES: [f64; 4] = [0.9, 0.1, 0.8, 0.2];

    fn curve(errors: &[f64], scores: &[f64], ordering: RejectionOrder) -> Vec<f64> {
        rejection_curve_from_scores(errors, scores, ErrorMetric::Mcr, ordering, Accounting::OracleZero).unwrap().values
    }

    #[test]
    fn enumerated_curve() {
        let v = curve(&ERRORS, &SCORES, RejectionOrder::Uncertainty);
        assert_eq!(&v[..3], &[0.5, 0.25, 0.0]);
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn oracle_reaches_zero_at_error_fraction() {
        let errors = [0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let v = curve(&errors, &[0.0; 6], RejectionOrder::Oracle);
        assert_eq!(v[3], 0.0);
        assert!(v[3..].iter().all(|&x| x == 0.0));
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn random_is_a_straight_line() {
        let v = curve(&ERRORS, &SCORES, RejectionOrder::RandomAnalytic);
        for (i, x) in v.iter().enumerate() {
            assert_abs_diff_eq!(*x, 0.5 * (1.0 - i as f64 / 4.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn all_correct_is_flat_zero() {
        for o in [RejectionOrder::Uncertainty, RejectionOrder::Oracle, RejectionOrder::RandomAnalytic] {
            assert!(curve(&[0.0; 5], &[0.3, 0.1, 0.5, 0.2, 0.4], o).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn retained_only_accounting() {
        let c = rejection_curve_from_scores(
            &ERRORS,
            &SCORES,
            ErrorMetric::Mcr,
            RejectionOrder::Uncertainty,
            Accounting::RetainedOnly,
        )
        .unwrap();
        assert_eq!(c.values, vec![0.5, 1.0 / 3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fractions_grid() {
        let c = rejection_curve_from_scores(
            &ERRORS,
            &SCORES,
            ErrorMetric::Mcr,
            RejectionOrder::Oracle,
            Accounting::OracleZero,
        )
        .unwrap();
        assert_eq!(c.fractions, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn ties_break_by_index() {
        // equal scores: reject index 0 first, then 1
        let v = curve(&[0.0, 1.0, 0.0], &[0.5, 0.5, 0.1], RejectionOrder::Uncertainty);
        assert_abs_diff_eq!(v[1], 1.0 / 3.0);
        assert_abs_diff_eq!(v[2], 0.0);
    }

    #[test]
    fn prr_perfect_and_reversed() {
        let r = prr_from_scores(&ERRORS, &SCORES).unwrap();
        assert_abs_diff_eq!(r.prr, 1.0, epsilon = 1e-12);
        let reversed: Vec<f64> = SCORES.iter().map(|s| -s).collect();
        assert!(prr_from_scores(&ERRORS, &reversed).unwrap().prr < 0.0);
    }

    #[test]
    fn prr_undefined_without_errors() {
        assert!(matches!(prr_from_scores(&[0.0; 4], &SCORES), Err(UqError::UndefinedPrr { .. })));
        // every instance wrong: oracle cannot beat random
        assert!(matches!(prr_from_scores(&[1.0; 4], &SCORES), Err(UqError::UndefinedPrr { .. })));
    }

    #[test]
    fn input_validation() {
        assert!(prr_from_scores(&[1.0], &[0.0]).is_err());
        assert!(prr_from_scores(&[1.0, 0.0], &[0.0]).is_err());
        assert!(prr_from_scores(&[1.0, 0.0], &[f64::NAN, 0.0]).is_err());
    }
}
