use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, UqError};
use crate::measures::{compute_uncertainty, LogBase, MeasureKind, UncertaintyKind, UncertaintyTriple};
use crate::prob::{EnsemblePrediction, ProbabilityVector};

/// One evaluated instance: the ensemble, its mean, the true class and the
/// uncertainty triples computed for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub mean: ProbabilityVector,
    pub members: EnsemblePrediction,
    pub true_label: usize,
    pub uncertainty: BTreeMap<MeasureKind, UncertaintyTriple>,
}

impl PredictionRecord {
    /// Record without uncertainty values; see [`PredictionRecord::with_measures`].
    pub fn new(members: EnsemblePrediction, true_label: usize) -> Result<Self> {
        members.scale().check_class(true_label)?;
        Ok(Self { mean: members.posterior_mean(), members, true_label, uncertainty: BTreeMap::new() })
    }

    pub fn with_measures(mut self, measures: &[MeasureKind], log_base: LogBase) -> Self {
        for &m in measures {
            self.uncertainty.insert(m, compute_uncertainty(&self.members, m, log_base));
        }
        self
    }

    pub fn k(&self) -> usize {
        self.mean.k()
    }

    pub fn score(&self, measure: MeasureKind, kind: UncertaintyKind) -> Result<f64> {
        self.uncertainty.get(&measure).map(|t| t.get(kind)).ok_or_else(|| UqError::MissingMeasure(measure.to_string()))
    }
}
