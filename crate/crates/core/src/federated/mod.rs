//! Server/client simulation of FedProx training.
//!
//! The server side ([`run_round`], [`run_federation`]) is generic over
//! [`FederatedClient`] and only ever sees a client's id, its sample count and
//! the parameters it returns. Raw rows stay behind the client's `fit`.

mod client;
mod history;
mod server;

pub use crate::data::ClientPartition;
pub use client::{ClientUpdate, FederatedClient};
pub use history::{history_rows, write_history_csv};
pub use server::{
    aggregate, best_round, predict_dataset, run_federation, run_round, select_clients, FederationConfig, RoundRecord,
    Strategy,
};

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum FedError {
    #[error("no client updates to aggregate")]
    EmptyUpdates,
    #[error("no clients")]
    NoClients,
    #[error("client {0} reported zero samples")]
    ZeroSamples(i64),
    #[error("client {0} appears twice in one round")]
    DuplicateClient(i64),
    #[error("update shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("requested {requested} clients but only {available} are available")]
    TooManyClients { requested: usize, available: usize },
    #[error("empty history")]
    EmptyHistory,
    #[error("invalid federation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub type Result<T, E = FedError> = std::result::Result<T, E>;
