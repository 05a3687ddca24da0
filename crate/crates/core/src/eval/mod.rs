//! Ordinal metrics, decision rules, rejection curves, prediction-rejection
//! ratios and AUC-ROC.

mod auc;
mod decision;
mod metrics;
mod record;
mod rejection;

pub use auc::auc_roc;
pub use decision::{decide, Decision, DecisionRule};
pub use metrics::{
    emd_loss, point_metrics, prob_metrics, quadratic_weighted_kappa, ErrorMetric, OneOffMode, PointMetrics,
    ProbMetrics, ECE_BINS, NLL_FLOOR,
};
pub use record::PredictionRecord;
pub use rejection::{
    prr, prr_from_scores, rejection_curve, rejection_curve_from_scores, Accounting, PrrResult, RejectionCurve,
    RejectionOrder, ScoreSource,
};
