//! First-order predictions over an ordered label scale and finite ensembles of them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UqError};

/// Tolerance on `|Σp − 1|` accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Number of ordered classes `K`. Classes are the integers `1..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ClassScale(usize);

impl ClassScale {
    pub fn new(k_count: usize) -> Result<Self> {
        if k_count < 2 {
            return Err(UqError::ScaleTooSmall(k_count));
        }
        Ok(Self(k_count))
    }

    pub fn k(self) -> usize {
        self.0
    }

    /// Class labels in scale order.
    pub fn classes(self) -> std::ops::RangeInclusive<usize> {
        1..=self.0
    }

    pub fn check_class(self, class: usize) -> Result<()> {
        if class == 0 || class > self.0 {
            return Err(UqError::IndexOutOfRange { index: class, lo: 1, hi: self.0 });
        }
        Ok(())
    }
}

impl TryFrom<usize> for ClassScale {
    type Error = UqError;

    fn try_from(value: usize) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ClassScale> for usize {
    fn from(scale: ClassScale) -> usize {
        scale.0
    }
}

/// A categorical distribution over the `K` ordered classes.
///
/// Entries are validated at construction: finite, non-negative, summing to one
/// within [`SUM_TOLERANCE`]. Inputs that are only approximately normalized must go
/// through [`ProbabilityVector::renormalized`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(UqError::NotNormalized { sum, tolerance: SUM_TOLERANCE });
        }
        Ok(Self { probs })
    }

    /// Divides by the sum when it lies within `tolerance` of one.
    pub fn renormalized(probs: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_entries(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tolerance || sum <= 0.0 {
            return Err(UqError::NotNormalized { sum, tolerance });
        }
        Ok(Self { probs: probs.into_iter().map(|p| p / sum).collect() })
    }

    pub fn one_hot(k_count: usize, class: usize) -> Result<Self> {
        let scale = ClassScale::new(k_count)?;
        scale.check_class(class)?;
        let mut probs = vec![0.0; k_count];
        probs[class - 1] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(k_count: usize) -> Result<Self> {
        ClassScale::new(k_count)?;
        Ok(Self { probs: vec![1.0 / k_count as f64; k_count] })
    }

    /// Internal constructor for vectors that are normalized by construction
    /// (means of valid vectors, lattice points).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(probs.len() >= 2);
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        Self { probs }
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn scale(&self) -> ClassScale {
        ClassScale(self.probs.len())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Probability of `class` (1-based).
    pub fn prob(&self, class: usize) -> Result<f64> {
        self.scale().check_class(class)?;
        Ok(self.probs[class - 1])
    }

    /// Cumulative distribution `F_1, …, F_K`.
    pub fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `μ = Σ k·p_k` under the integer encoding `1..=K`.
    pub fn mean_class(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1) as f64 * p).sum()
    }

    /// The vector with class order reversed (`k ↦ K+1−k`).
    pub fn reversed(&self) -> Self {
        Self { probs: self.probs.iter().rev().copied().collect() }
    }

    /// Applies a class permutation: entry `i` of the result is `p[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(UqError::DimensionMismatch { expected: self.k(), actual: perm.len() });
        }
        let mut seen = vec![false; perm.len()];
        for &i in perm {
            if i >= perm.len() || std::mem::replace(&mut seen[i], true) {
                return Err(UqError::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { probs: perm.iter().map(|&i| self.probs[i]).collect() })
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        Self::new(probs).map_err(serde::de::Error::custom)
    }
}

fn check_entries(probs: &[f64]) -> Result<()> {
    ClassScale::new(probs.len())?;
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(UqError::InvalidProbability { index, value });
        }
    }
    Ok(())
}

/// Bernoulli distribution produced by a binary reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryDistribution {
    pub p0: f64,
    pub p1: f64,
}

impl BinaryDistribution {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        for (index, value) in [p0, p1].into_iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(UqError::InvalidProbability { index, value });
            }
        }
        let sum = p0 + p1;
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(UqError::NotNormalized { sum, tolerance: SUM_TOLERANCE });
        }
        Ok(Self { p0, p1 })
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.p0, self.p1]
    }
}

/// `M` first-order predictions approximating the second-order posterior, with
/// uniform weights `1/M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EnsemblePrediction {
    members: Vec<ProbabilityVector>,
}

impl EnsemblePrediction {
    pub fn new(members: Vec<ProbabilityVector>) -> Result<Self> {
        let first = members.first().ok_or(UqError::EmptyEnsemble)?;
        let k = first.k();
        if let Some(bad) = members.iter().find(|m| m.k() != k) {
            return Err(UqError::DimensionMismatch { expected: k, actual: bad.k() });
        }
        Ok(Self { members })
    }

    /// Validates each row as a [`ProbabilityVector`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(ProbabilityVector::new).collect::<Result<_>>()?)
    }

    pub fn single(member: ProbabilityVector) -> Self {
        Self { members: vec![member] }
    }

    pub fn members(&self) -> &[ProbabilityVector] {
        &self.members
    }

    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn k(&self) -> usize {
        self.members[0].k()
    }

    pub fn scale(&self) -> ClassScale {
        self.members[0].scale()
    }

    /// Component-wise arithmetic mean of the members.
    pub fn posterior_mean(&self) -> ProbabilityVector {
        let m = self.members.len() as f64;
        let probs = (0..self.k()).map(|i| self.members.iter().map(|p| p.probs[i]).sum::<f64>() / m).collect();
        ProbabilityVector::from_normalized(probs)
    }

    /// Same ensemble with every member's classes permuted.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(Self { members: self.members.iter().map(|p| p.permuted(perm)).collect::<Result<_>>()? })
    }
}
