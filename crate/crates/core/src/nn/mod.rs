//! Dense ReLU/sigmoid network with hand-written backpropagation.
//!
//! Parameters are plain values ([`ModelParams`]); every operation returns a
//! new value so the server's broadcast model is never mutated by clients.

mod checkpoint;
mod model;
mod train;

pub use checkpoint::{load_checkpoint, store_checkpoint, CHECKPOINT_TAG};
pub use model::{init_model, Gradients, Layer, Matrix, ModelParams};
pub use train::{
    backward, bce_loss, fedprox_objective, forward, proximal_grad, sgd_step, train_local, TrainConfig, PROB_EPSILON,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty partition")]
    EmptyPartition,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = NnError> = std::result::Result<T, E>;
