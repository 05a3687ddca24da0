use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::decision::{argmax, decide, DecisionRule};
use super::record::PredictionRecord;
use crate::error::{Result, UqError};
use crate::prob::ProbabilityVector;

/// Lower bound applied to `p(y_true)` before taking the log.
pub const NLL_FLOOR: f64 = 1e-12;
/// Equal-width confidence bins for ECE.
pub const ECE_BINS: usize = 10;

/// How 1-OFF accuracy counts a hit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OneOffMode {
    /// `|argmax − y| ≤ 1`.
    #[default]
    Adjacent,
    /// `y` is one of the two most probable classes.
    Top2,
}

/// Per-instance error used by rejection curves. Each metric pairs with the
/// decision rule that minimizes its expected value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMetric {
    Mcr,
    Mae,
    Mse,
}

impl ErrorMetric {
    pub const ALL: [ErrorMetric; 3] = [ErrorMetric::Mcr, ErrorMetric::Mae, ErrorMetric::Mse];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorMetric::Mcr => "mcr",
            ErrorMetric::Mae => "mae",
            ErrorMetric::Mse => "mse",
        }
    }

    pub fn decision_rule(self) -> DecisionRule {
        match self {
            ErrorMetric::Mcr => DecisionRule::Argmax,
            ErrorMetric::Mae => DecisionRule::L1,
            ErrorMetric::Mse => DecisionRule::L2,
        }
    }

    pub fn instance_error(self, record: &PredictionRecord) -> f64 {
        let predicted = decide(&record.mean, self.decision_rule()).class() as f64;
        let d = predicted - record.true_label as f64;
        match self {
            ErrorMetric::Mcr => f64::from(u8::from(d != 0.0)),
            ErrorMetric::Mae => d.abs(),
            ErrorMetric::Mse => d * d,
        }
    }
}

impl fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorMetric {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        ErrorMetric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UqError::InvalidArgument(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub mcr: f64,
    pub mae: f64,
    pub mse: f64,
    pub qwk: f64,
    /// Set when the expected weighted disagreement is zero; `qwk` is then 0.
    pub qwk_degenerate: bool,
    pub one_off: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbMetrics {
    pub nll: f64,
    pub brier: f64,
    pub rps: f64,
    pub ece: f64,
    /// Records whose `p(y_true)` hit [`NLL_FLOOR`].
    pub nll_floored: usize,
}

fn check_records(records: &[PredictionRecord]) -> Result<usize> {
    let first = records.first().ok_or(UqError::EmptyInput("prediction records"))?;
    let k = first.k();
    if let Some(r) = records.iter().find(|r| r.k() != k) {
        return Err(UqError::DimensionMismatch { expected: k, actual: r.k() });
    }
    Ok(k)
}

/// Cohen's kappa with weights `(i − j)² / (K − 1)²`. Returns `(kappa, degenerate)`.
pub fn quadratic_weighted_kappa(truth: &[usize], predicted: &[usize], k: usize) -> Result<(f64, bool)> {
    if truth.len() != predicted.len() {
        return Err(UqError::DimensionMismatch { expected: truth.len(), actual: predicted.len() });
    }
    if truth.is_empty() {
        return Err(UqError::EmptyInput("kappa labels"));
    }
    let mut observed = vec![vec![0.0; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        for c in [t, p] {
            if c == 0 || c > k {
                return Err(UqError::IndexOutOfRange { index: c, lo: 1, hi: k });
            }
        }
        observed[t - 1][p - 1] += 1.0;
    }
    let n = truth.len() as f64;
    let row: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..k).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
    let scale = ((k - 1) * (k - 1)) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let w = ((i as f64 - j as f64).powi(2)) / scale;
            num += w * observed[i][j];
            den += w * row[i] * col[j] / n;
        }
    }
    if den <= 0.0 {
        return Ok((0.0, true));
    }
    Ok((1.0 - num / den, false))
}

pub fn point_metrics(records: &[PredictionRecord], one_off: OneOffMode) -> Result<PointMetrics> {
    let k = check_records(records)?;
    let n = records.len() as f64;
    let mean_error = |m: ErrorMetric| records.iter().map(|r| m.instance_error(r)).sum::<f64>() / n;

    let truth: Vec<usize> = records.iter().map(|r| r.true_label).collect();
    let modal: Vec<usize> = records.iter().map(|r| argmax(r.mean.as_slice())).collect();
    let (qwk, qwk_degenerate) = quadratic_weighted_kappa(&truth, &modal, k)?;

    let hits = records
        .iter()
        .zip(&modal)
        .filter(|(r, &m)| match one_off {
            OneOffMode::Adjacent => m.abs_diff(r.true_label) <= 1,
            OneOffMode::Top2 => decide(&r.mean, DecisionRule::Top2).contains(r.true_label),
        })
        .count();

    Ok(PointMetrics {
        mcr: mean_error(ErrorMetric::Mcr),
        mae: mean_error(ErrorMetric::Mae),
        mse: mean_error(ErrorMetric::Mse),
        qwk,
        qwk_degenerate,
        one_off: hits as f64 / n,
    })
}

/// Squared distance between predicted and one-hot cumulative distributions over
/// the first `K − 1` classes.
pub fn emd_loss(p: &ProbabilityVector, y: usize) -> Result<f64> {
    p.scale().check_class(y)?;
    let cdf = p.cdf();
    Ok(cdf[..p.k() - 1]
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let target = if i + 1 >= y { 1.0 } else { 0.0 };
            (f - target) * (f - target)
        })
        .sum())
}

pub fn prob_metrics(records: &[PredictionRecord]) -> Result<ProbMetrics> {
    check_records(records)?;
    let n = records.len() as f64;
    let mut nll = 0.0;
    let mut nll_floored = 0;
    let mut brier = 0.0;
    let mut rps = 0.0;
    let mut bins = [(0usize, 0.0f64, 0.0f64); ECE_BINS];

    for r in records {
        let probs = r.mean.as_slice();
        let py = probs[r.true_label - 1];
        if py < NLL_FLOOR {
            nll_floored += 1;
        }
        nll -= py.max(NLL_FLOOR).ln();
        brier += probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let d = p - if i + 1 == r.true_label { 1.0 } else { 0.0 };
                d * d
            })
            .sum::<f64>();
        rps += emd_loss(&r.mean, r.true_label)?;

        let predicted = argmax(probs);
        let confidence = probs[predicted - 1];
        let b = ((confidence * ECE_BINS as f64) as usize).min(ECE_BINS - 1);
        bins[b].0 += 1;
        bins[b].1 += f64::from(u8::from(predicted == r.true_label));
        bins[b].2 += confidence;
    }
    if nll_floored > 0 {
        log::warn!("{nll_floored} record(s) assign probability below {NLL_FLOOR:e} to the true class");
    }

    let ece = bins
        .iter()
        .filter(|b| b.0 > 0)
        .map(|&(count, correct, conf)| (count as f64 / n) * ((correct - conf) / count as f64).abs())
        .sum();

    Ok(ProbMetrics { nll: nll / n, brier: brier / n, rps: rps / n, ece, nll_floored })
}
