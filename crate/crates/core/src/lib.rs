//! Uncertainty quantification for probabilistic ordinal classification.
//!
//! The crate splits into three layers:
//!
//! - [`prob`] and [`measures`]: first-order predictions, ensembles, and the six
//!   total/aleatoric/epistemic decompositions (`ent`, `var`, `bin-ent`,
//!   `bin-var`, `ord-ent`, `ord-var`).
//! - [`eval`]: ordinal point and probabilistic metrics, rejection curves,
//!   prediction-rejection ratios and AUC-ROC.
//! - [`stats`]: Friedman, Wilcoxon signed-rank and Holm adjustment for
//!   comparing measures across datasets.
//!
//! Everything here is a pure function of its inputs.

pub mod error;
pub mod eval;
pub mod measures;
pub mod prob;
pub mod rank;
pub mod simplex;
pub mod stats;

pub use error::{Result, UqError};
pub use measures::{compute_uncertainty, BaseMeasure, LogBase, MeasureKind, UncertaintyKind, UncertaintyTriple};
pub use prob::{BinaryDistribution, ClassScale, EnsemblePrediction, ProbabilityVector};
