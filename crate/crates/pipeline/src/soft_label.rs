//! Geometric unimodal soft labels.

use ordunc_core::{ClassScale, ProbabilityVector};

use crate::error::{PipelineError, Result};

/// Smoothing factors used for the soft-labelled ensemble, one per member.
pub const ALPHA_GRID: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

/// `p(c) = 1 − α`; every other class gets `α^{|c−k|+1}(1−α) / G` with
/// `G = Σ_{k≠c} α^{|c−k|}(1−α)`, so the off-mode mass totals `α`.
pub fn soft_label_geometric(y: usize, k_count: usize, alpha: f64) -> Result<ProbabilityVector> {
    let scale = ClassScale::new(k_count)?;
    scale.check_class(y)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(PipelineError::Config(format!("smoothing factor {alpha} outside [0, 1)")));
    }
    if alpha == 0.0 {
        return Ok(ProbabilityVector::one_hot(k_count, y)?);
    }
    let dist = |k: usize| k.abs_diff(y) as i32;
    let g: f64 = scale.classes().filter(|&k| k != y).map(|k| alpha.powi(dist(k)) * (1.0 - alpha)).sum();
    let probs = scale
        .classes()
        .map(|k| if k == y { 1.0 - alpha } else { alpha.powi(dist(k) + 1) * (1.0 - alpha) / g })
        .collect();
    Ok(ProbabilityVector::new(probs)?)
}
