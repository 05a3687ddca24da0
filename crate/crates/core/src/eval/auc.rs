use crate::error::{Result, UqError};
use crate::rank::average_ranks;

/// Area under the ROC curve of `scores` for the positive class (`true`), via the
/// Mann–Whitney rank-sum with average ranks for ties.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(UqError::DimensionMismatch { expected: scores.len(), actual: labels.len() });
    }
    if let Some(v) = scores.iter().find(|v| !v.is_finite()) {
        return Err(UqError::InvalidArgument(format!("non-finite score {v}")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(UqError::InvalidArgument("AUC-ROC needs both positive and negative labels".into()));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}
