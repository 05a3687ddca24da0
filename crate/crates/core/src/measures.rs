//! Total, aleatoric and epistemic uncertainty of an ensemble prediction.
//!
//! Two base measures are available, Shannon entropy and the variance of the
//! integer-encoded label. Each can be applied to the multinomial prediction
//! directly, or to binary reductions of it:
//!
//! | measure   | reduction                        | aggregation        |
//! |-----------|----------------------------------|--------------------|
//! | `ent`     | none                             |                    |
//! | `var`     | none                             |                    |
//! | `bin-ent` | one-vs-rest per class `k`        | sum over `K`       |
//! | `bin-var` | one-vs-rest per class `k`        | sum over `K`       |
//! | `ord-ent` | split `{1..k}` vs `{k+1..K}`     | sum over `K − 1`   |
//! | `ord-var` | split `{1..k}` vs `{k+1..K}`     | sum over `K − 1`   |
//!
//! In every case `TU = AU + EU`. For entropy, `EU` is the mutual information
//! between member index and label and is computed as `TU − AU`; for variance it
//! is the spread of member means (law of total variance).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};
use crate::prob::{BinaryDistribution, EnsemblePrediction, ProbabilityVector};

/// Negative `TU − AU` beyond this is reported as malformed input rather than rounding.
pub const EU_CLAMP_WARN: f64 = 1e-9;

/// Logarithm base for entropies. Defaults to 2 (bits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if !base.is_finite() || base <= 1.0 {
            return Err(UqError::InvalidLogBase(base));
        }
        Ok(Self(base))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn log(self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.log2()
        } else {
            x.ln() / self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        Self::BITS
    }
}

impl TryFrom<f64> for LogBase {
    type Error = UqError;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LogBase> for f64 {
    fn from(base: LogBase) -> f64 {
        base.0
    }
}

/// The six uncertainty measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "ent")]
    Entropy,
    #[serde(rename = "var")]
    Variance,
    #[serde(rename = "bin-ent")]
    BinaryEntropy,
    #[serde(rename = "bin-var")]
    BinaryVariance,
    #[serde(rename = "ord-ent")]
    OrdinalEntropy,
    #[serde(rename = "ord-var")]
    OrdinalVariance,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::Entropy,
        MeasureKind::Variance,
        MeasureKind::BinaryEntropy,
        MeasureKind::BinaryVariance,
        MeasureKind::OrdinalEntropy,
        MeasureKind::OrdinalVariance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Entropy => "ent",
            MeasureKind::Variance => "var",
            MeasureKind::BinaryEntropy => "bin-ent",
            MeasureKind::BinaryVariance => "bin-var",
            MeasureKind::OrdinalEntropy => "ord-ent",
            MeasureKind::OrdinalVariance => "ord-var",
        }
    }

    pub fn base(self) -> BaseMeasure {
        match self {
            MeasureKind::Entropy | MeasureKind::BinaryEntropy | MeasureKind::OrdinalEntropy => BaseMeasure::Entropy,
            _ => BaseMeasure::Variance,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UqError::InvalidArgument(format!("unknown measure `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseMeasure {
    Entropy,
    Variance,
}

/// Which component of a triple to use as a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    Tu,
    Au,
    Eu,
}

impl UncertaintyKind {
    pub const ALL: [UncertaintyKind; 3] = [UncertaintyKind::Tu, UncertaintyKind::Au, UncertaintyKind::Eu];

    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyKind::Tu => "tu",
            UncertaintyKind::Au => "au",
            UncertaintyKind::Eu => "eu",
        }
    }
}

impl fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UncertaintyKind {
    type Err = UqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tu" => Ok(UncertaintyKind::Tu),
            "au" => Ok(UncertaintyKind::Au),
            "eu" => Ok(UncertaintyKind::Eu),
            _ => Err(UqError::InvalidArgument(format!("unknown uncertainty kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyTriple {
    pub tu: f64,
    pub au: f64,
    pub eu: f64,
    pub measure: MeasureKind,
}

impl UncertaintyTriple {
    pub fn get(&self, kind: UncertaintyKind) -> f64 {
        match kind {
            UncertaintyKind::Tu => self.tu,
            UncertaintyKind::Au => self.au,
            UncertaintyKind::Eu => self.eu,
        }
    }
}

#[derive(Clone, Copy)]
struct Parts {
    tu: f64,
    au: f64,
    eu: f64,
}

impl Parts {
    const ZERO: Parts = Parts { tu: 0.0, au: 0.0, eu: 0.0 };

    fn add(self, other: Parts) -> Parts {
        Parts { tu: self.tu + other.tu, au: self.au + other.au, eu: self.eu + other.eu }
    }

    fn tag(self, measure: MeasureKind) -> UncertaintyTriple {
        UncertaintyTriple { tu: self.tu, au: self.au, eu: self.eu, measure }
    }
}

fn entropy_of(probs: &[f64], base: LogBase) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * base.log(p)).sum();
    // -0.0 and sub-ulp negatives from p == 1
    h.max(0.0)
}

fn clamp_eu(tu: f64, au: f64) -> f64 {
    let eu = tu - au;
    if eu < -EU_CLAMP_WARN {
        log::warn!("negative mutual information {eu:e} clamped to 0 (tu={tu}, au={au})");
    }
    eu.max(0.0)
}

/// `−Σ p_k log p_k` with `0·log 0 = 0`.
pub fn shannon_entropy(p: &ProbabilityVector, base: LogBase) -> f64 {
    entropy_of(p.as_slice(), base)
}

/// Variance of the label under the integer encoding `1..=K`.
pub fn ordinal_variance(p: &ProbabilityVector) -> f64 {
    let mu = p.mean_class();
    p.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &pk)| {
            let d = (i + 1) as f64 - mu;
            pk * d * d
        })
        .sum()
}

pub fn decompose_entropy(e: &EnsemblePrediction, base: LogBase) -> UncertaintyTriple {
    let tu = shannon_entropy(&e.posterior_mean(), base);
    let au = e.members().iter().map(|p| shannon_entropy(p, base)).sum::<f64>() / e.m() as f64;
    Parts { tu, au, eu: clamp_eu(tu, au) }.tag(MeasureKind::Entropy)
}

pub fn decompose_variance(e: &EnsemblePrediction) -> UncertaintyTriple {
    let m = e.m() as f64;
    let means: Vec<f64> = e.members().iter().map(ProbabilityVector::mean_class).collect();
    let mu = means.iter().sum::<f64>() / m;
    let au = e.members().iter().map(ordinal_variance).sum::<f64>() / m;
    let eu = means.iter().map(|&mu_m| (mu - mu_m) * (mu - mu_m)).sum::<f64>() / m;
    let tu = ordinal_variance(&e.posterior_mean());
    Parts { tu, au, eu }.tag(MeasureKind::Variance)
}

/// Class `k` against the rest: `p1 = p_k`.
pub fn one_vs_rest_reduce(p: &ProbabilityVector, k: usize) -> Result<BinaryDistribution> {
    let p1 = p.prob(k)?;
    let p0 = p.as_slice().iter().enumerate().filter(|&(i, _)| i + 1 != k).map(|(_, &x)| x).sum();
    Ok(BinaryDistribution { p0, p1 })
}

/// Lower part `{1..=k}` (outcome 0) against upper part `{k+1..=K}` (outcome 1).
pub fn ocs_reduce(p: &ProbabilityVector, k: usize) -> Result<BinaryDistribution> {
    if k == 0 || k >= p.k() {
        return Err(UqError::IndexOutOfRange { index: k, lo: 1, hi: p.k() - 1 });
    }
    let (lower, upper) = p.as_slice().split_at(k);
    Ok(BinaryDistribution { p0: lower.iter().sum(), p1: upper.iter().sum() })
}

fn binary_parts(members: &[BinaryDistribution], base: BaseMeasure, log_base: LogBase) -> Parts {
    let m = members.len() as f64;
    let p1_mean = members.iter().map(|b| b.p1).sum::<f64>() / m;
    let p0_mean = members.iter().map(|b| b.p0).sum::<f64>() / m;
    match base {
        BaseMeasure::Entropy => {
            let tu = entropy_of(&[p0_mean, p1_mean], log_base);
            let au = members.iter().map(|b| entropy_of(&b.as_array(), log_base)).sum::<f64>() / m;
            Parts { tu, au, eu: clamp_eu(tu, au) }
        }
        BaseMeasure::Variance => {
            let tu = p0_mean * p1_mean;
            let au = members.iter().map(|b| b.p0 * b.p1).sum::<f64>() / m;
            let eu = members.iter().map(|b| (b.p1 - p1_mean) * (b.p1 - p1_mean)).sum::<f64>() / m;
            Parts { tu, au, eu }
        }
    }
}

fn aggregate<F>(
    e: &EnsemblePrediction,
    splits: std::ops::RangeInclusive<usize>,
    reduce: F,
    base: BaseMeasure,
    log_base: LogBase,
) -> Parts
where
    F: Fn(&ProbabilityVector, usize) -> Result<BinaryDistribution>,
{
    let mut buf = Vec::with_capacity(e.m());
    splits.fold(Parts::ZERO, |acc, k| {
        buf.clear();
        // split indices come from the ensemble's own scale
        buf.extend(e.members().iter().map(|p| reduce(p, k).expect("split index within scale")));
        acc.add(binary_parts(&buf, base, log_base))
    })
}

/// Sum of one-vs-rest uncertainties over all `K` classes.
pub fn aggregate_labelwise(e: &EnsemblePrediction, base: BaseMeasure, log_base: LogBase) -> UncertaintyTriple {
    let measure = match base {
        BaseMeasure::Entropy => MeasureKind::BinaryEntropy,
        BaseMeasure::Variance => MeasureKind::BinaryVariance,
    };
    aggregate(e, 1..=e.k(), one_vs_rest_reduce, base, log_base).tag(measure)
}

/// Sum of order-consistent-split uncertainties over the `K − 1` splits.
pub fn aggregate_ordinal(e: &EnsemblePrediction, base: BaseMeasure, log_base: LogBase) -> UncertaintyTriple {
    let measure = match base {
        BaseMeasure::Entropy => MeasureKind::OrdinalEntropy,
        BaseMeasure::Variance => MeasureKind::OrdinalVariance,
    };
    aggregate(e, 1..=e.k() - 1, ocs_reduce, base, log_base).tag(measure)
}

pub fn compute_uncertainty(e: &EnsemblePrediction, measure: MeasureKind, log_base: LogBase) -> UncertaintyTriple {
    match measure {
        MeasureKind::Entropy => decompose_entropy(e, log_base),
        MeasureKind::Variance => decompose_variance(e),
        MeasureKind::BinaryEntropy | MeasureKind::BinaryVariance => aggregate_labelwise(e, measure.base(), log_base),
        MeasureKind::OrdinalEntropy | MeasureKind::OrdinalVariance => aggregate_ordinal(e, measure.base(), log_base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn ens(rows: &[&[f64]]) -> EnsemblePrediction {
        EnsemblePrediction::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let b = LogBase::BITS;
        assert_abs_diff_eq!(shannon_entropy(&ProbabilityVector::uniform(4).unwrap(), b), 2.0);
        assert_eq!(shannon_entropy(&pv(&[1.0, 0.0, 0.0]), b), 0.0);
        assert_abs_diff_eq!(shannon_entropy(&pv(&[0.5, 0.25, 0.125, 0.0625, 0.0625]), b), 1.875, epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_entropy(&pv(&[0.5, 0.5]), LogBase::NATS), std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn log_base_validation() {
        assert!(LogBase::new(1.0).is_err());
        assert!(LogBase::new(0.5).is_err());
        assert!(LogBase::new(f64::INFINITY).is_err());
        assert!(LogBase::new(10.0).is_ok());
    }

    #[test]
    fn variance_examples() {
        assert_abs_diff_eq!(ordinal_variance(&pv(&[0.5, 0.0, 0.5])), 1.0);
        assert_eq!(ordinal_variance(&pv(&[0.0, 1.0, 0.0])), 0.0);
        assert_abs_diff_eq!(ordinal_variance(&ProbabilityVector::uniform(3).unwrap()), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_decomposition_examples() {
        let t = decompose_entropy(&ens(&[&[1.0, 0.0], &[0.0, 1.0]]), LogBase::BITS);
        assert_eq!((t.tu, t.au, t.eu), (1.0, 0.0, 1.0));
        assert_eq!(t.measure, MeasureKind::Entropy);

        let t = decompose_entropy(&ens(&[&[0.8, 0.2], &[0.2, 0.8]]), LogBase::BITS);
        assert_abs_diff_eq!(t.tu, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.au, 0.721_928_094_887_362_3, epsilon = 1e-12);
        assert_abs_diff_eq!(t.eu, 0.278_071_905_112_637_7, epsilon = 1e-12);

        let p = [0.1, 0.6, 0.3];
        let t = decompose_entropy(&ens(&[&p, &p, &p]), LogBase::BITS);
        assert_abs_diff_eq!(t.eu, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.tu, shannon_entropy(&pv(&p), LogBase::BITS), epsilon = 1e-12);
    }

    #[test]
    fn variance_decomposition_examples() {
        let t = decompose_variance(&ens(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]));
        assert_eq!((t.tu, t.au, t.eu), (1.0, 0.0, 1.0));

        let t = decompose_variance(&ens(&[&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5]]));
        assert_abs_diff_eq!(t.au, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(t.eu, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(t.tu, 0.5, epsilon = 1e-15);

        let p = [0.2, 0.2, 0.6];
        let t = decompose_variance(&ens(&[&p, &p]));
        assert_eq!(t.eu, 0.0);
        assert_abs_diff_eq!(t.tu, ordinal_variance(&pv(&p)), epsilon = 1e-15);
    }

    #[test]
    fn reductions() {
        let p = pv(&[0.2, 0.3, 0.5]);
        let b = one_vs_rest_reduce(&p, 2).unwrap();
        assert_abs_diff_eq!(b.p0, 0.7);
        assert_eq!(b.p1, 0.3);
        let b = one_vs_rest_reduce(&pv(&[0.0, 1.0, 0.0]), 2).unwrap();
        assert_eq!((b.p0, b.p1), (0.0, 1.0));
        let b = one_vs_rest_reduce(&ProbabilityVector::uniform(5).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(b.p0, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(b.p1, 0.2, epsilon = 1e-15);
        assert!(one_vs_rest_reduce(&p, 0).is_err());
        assert!(one_vs_rest_reduce(&p, 4).is_err());

        let b = ocs_reduce(&p, 1).unwrap();
        assert_eq!(b.p0, 0.2);
        assert_abs_diff_eq!(b.p1, 0.8);
        let b = ocs_reduce(&p, 2).unwrap();
        assert_abs_diff_eq!(b.p0, 0.5);
        assert_eq!(b.p1, 0.5);
        assert!(ocs_reduce(&p, 0).is_err());
        assert!(ocs_reduce(&p, 3).is_err());
    }

    #[test]
    fn labelwise_examples() {
        let t = aggregate_labelwise(&ens(&[&[0.5, 0.5], &[0.5, 0.5]]), BaseMeasure::Entropy, LogBase::BITS);
        assert_abs_diff_eq!(t.tu, 2.0);
        assert_eq!(t.measure, MeasureKind::BinaryEntropy);

        let t = aggregate_labelwise(&ens(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]), BaseMeasure::Variance, LogBase::BITS);
        assert_abs_diff_eq!(t.tu, 0.5);
        assert_abs_diff_eq!(t.au, 0.0);
        assert_abs_diff_eq!(t.eu, 0.5);
        assert_eq!(t.measure, MeasureKind::BinaryVariance);
    }

    #[test]
    fn ordinal_examples() {
        let e = ens(&[&[0.5, 0.0, 0.5]]);
        let t = aggregate_ordinal(&e, BaseMeasure::Entropy, LogBase::BITS);
        assert_eq!(t.tu, 2.0);
        assert_eq!(t.measure, MeasureKind::OrdinalEntropy);
        let t = aggregate_ordinal(&e, BaseMeasure::Variance, LogBase::BITS);
        assert_eq!(t.tu, 0.5);
        assert_eq!(t.measure, MeasureKind::OrdinalVariance);
        let t = aggregate_ordinal(&ens(&[&[0.5, 0.5, 0.0]]), BaseMeasure::Entropy, LogBase::BITS);
        assert_eq!(t.tu, 1.0);
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let e = ens(&[&[0.1, 0.2, 0.7], &[0.3, 0.3, 0.4], &[0.6, 0.2, 0.2]]);
        let b = LogBase::BITS;
        assert_eq!(compute_uncertainty(&e, MeasureKind::Entropy, b), decompose_entropy(&e, b));
        assert_eq!(compute_uncertainty(&e, MeasureKind::Variance, b), decompose_variance(&e));
        assert_eq!(
            compute_uncertainty(&e, MeasureKind::OrdinalVariance, b),
            aggregate_ordinal(&e, BaseMeasure::Variance, b)
        );
        assert_eq!(
            compute_uncertainty(&e, MeasureKind::BinaryEntropy, b),
            aggregate_labelwise(&e, BaseMeasure::Entropy, b)
        );
        for m in MeasureKind::ALL {
            assert_eq!(compute_uncertainty(&e, m, b).measure, m);
        }
    }

    #[test]
    fn identical_members_have_no_epistemic_part() {
        let p = [0.15, 0.25, 0.05, 0.55];
        let e = ens(&[&p, &p, &p, &p, &p]);
        for m in MeasureKind::ALL {
            let t = compute_uncertainty(&e, m, LogBase::BITS);
            assert_abs_diff_eq!(t.eu, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(t.tu, t.au, epsilon = 1e-12);
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in MeasureKind::ALL {
            assert_eq!(m.as_str().parse::<MeasureKind>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
        assert!("entropy".parse::<MeasureKind>().is_err());
    }
}
