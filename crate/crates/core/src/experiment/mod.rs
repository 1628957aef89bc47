//! Config-driven runs that bind the pipeline, both training arms and the
//! metric exports together. Every command is a pure function of its
//! [`ExperimentConfig`]; only the wall-clock section of `report.txt`
//! varies between runs.

mod commands;
mod config;
mod report;

pub use commands::{
    cmd_centralized, cmd_compare, cmd_federated, cmd_preprocess, cmd_synthesize, load_dataset, run_centralized,
    run_federated, CentralizedOutcome, FederatedOutcome, PreprocessSummary,
};
pub use config::{DataConfig, DataFormat, ExperimentConfig, OutputConfig, Overrides, PartitionConfig, SplitConfig};
pub use report::{ComparisonReport, PhaseTimings};

use std::path::PathBuf;

use thiserror::Error;

use crate::data::DataError;
use crate::federated::FedError;
use crate::gbdt::GbdtError;
use crate::metrics::MetricsError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Boost(#[from] GbdtError),
    #[error(transparent)]
    Federated(#[from] FedError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    /// 1 config error, 2 data error, 3 runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_)
            | ExperimentError::Boost(GbdtError::InvalidConfig(_))
            | ExperimentError::Federated(FedError::InvalidConfig(_))
            | ExperimentError::Federated(FedError::Nn(NnError::InvalidConfig(_)))
            | ExperimentError::Federated(FedError::TooManyClients { .. })
            | ExperimentError::Nn(NnError::InvalidConfig(_))
            | ExperimentError::Data(DataError::InvalidSpec(_)) => 1,
            ExperimentError::Data(_) | ExperimentError::Boost(GbdtError::SingleClass) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| ExperimentError::Io { path, source }
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;
