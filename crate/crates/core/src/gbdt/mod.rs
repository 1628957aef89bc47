//! Centralized benchmark: second-order gradient boosting with L2-regularized
//! leaf weights and a per-leaf complexity penalty, specialised to binary
//! (one-hot) features.
//!
//! For a leaf holding gradient sum `G` and hessian sum `H` the optimal
//! weight is `-G / (H + lambda)`; a split is scored by the drop in
//! `-G^2 / (2 (H + lambda))` across its children minus `gamma`.

mod boost;
mod dump;
mod tree;

pub use boost::{feature_importance, fit, fit_with_trace, log_loss, predict, BoostConfig, BoostedEnsemble};
pub use dump::{dump_model, load_model, parse_model, store_model, MODEL_TAG};
pub use tree::{build_tree, grad_hess, leaf_weight, split_gain, TreeNode};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("training data has a single class; both are required")]
    SingleClass,
    #[error("feature width {found} does not match the model's {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("H + lambda must be positive, got {0}")]
    ZeroCurvature(f64),
    #[error("invalid boost config: {0}")]
    InvalidConfig(String),
    #[error("model dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GbdtError> = std::result::Result<T, E>;
