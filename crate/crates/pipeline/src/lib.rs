//! Data handling and experiment orchestration around [`ordunc_core`].
//!
//! A run loads (or synthesizes) an ordinal dataset, splits it into folds, fits
//! a bagged ensemble of depth-limited trees on each training split, scores the
//! held-out instances with every uncertainty measure and persists per-fold
//! records, PRRs and optional OOD AUCs. Predictions produced elsewhere can be
//! brought in through the interchange format instead.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod folds;
pub mod interchange;
pub mod learner;
pub mod ood;
pub mod persist;
pub mod preprocess;
pub mod seed;
pub mod soft_label;
pub mod synthetic;

pub use error::{PipelineError, Result};
