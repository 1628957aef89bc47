//! Binary classification metrics. Class 1 is the positive class throughout.

mod confusion;
mod export;
mod roc;

pub use confusion::{confusion, ConfusionMatrix, Rate};
pub use export::{write_metrics_csv, write_roc_csv, MetricsRow, METRICS_HEADER};
pub use roc::{roc_auc, RocCurve, RocPoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::bce_loss;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no rows to evaluate")]
    Empty,
    #[error("AUC undefined: only one class present")]
    AucUndefined,
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("invalid label {0}; labels must be 0 or 1")]
    InvalidLabel(u8),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

/// Decision threshold: a row is predicted positive iff its score is
/// strictly greater.
pub const DECISION_THRESHOLD: f64 = 0.5;

pub fn threshold_labels(scores: &[f64]) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s > DECISION_THRESHOLD)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub loss: f64,
}

impl RoundMetrics {
    pub fn from_confusion(cm: &ConfusionMatrix, loss: f64) -> Self {
        let precision = cm.precision().value;
        let recall = cm.recall().value;
        Self {
            accuracy: cm.accuracy(),
            precision,
            recall,
            f1: confusion::harmonic_mean(precision, recall),
            loss,
        }
    }
}

/// Metric suite for one evaluation: `scores` are positive-class
/// probabilities, `predicted` their thresholded labels.
pub fn evaluate(scores: &[f64], predicted: &[u8], actual: &[u8]) -> Result<RoundMetrics> {
    if scores.len() != actual.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), actual.len()));
    }
    let cm = confusion(predicted, actual)?;
    let loss = bce_loss(scores, actual).map_err(|_| MetricsError::LengthMismatch(scores.len(), actual.len()))?;
    Ok(RoundMetrics::from_confusion(&cm, loss))
}

/// [`evaluate`] with labels derived from [`DECISION_THRESHOLD`].
pub fn evaluate_scores(scores: &[f64], actual: &[u8]) -> Result<RoundMetrics> {
    evaluate(scores, &threshold_labels(scores), actual)
}
