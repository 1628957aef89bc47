//! Privacy-preserving student performance prediction.
//!
//! Two training arms share one preprocessing pipeline and one metric suite:
//!
//! - [`gbdt`]: a centralized, regularized gradient-boosted-tree classifier
//!   trained on the pooled dataset.
//! - [`federated`]: a dense ReLU/sigmoid network ([`nn`]) trained across
//!   school-level clients with FedProx local objectives and sample-weighted
//!   averaging on the server.
//!
//! [`experiment`] binds both arms into reproducible, config-driven runs.

pub mod data;
pub mod experiment;
pub mod federated;
pub mod gbdt;
pub mod metrics;
pub mod nn;
pub mod seed;

pub use data::{ClientPartition, Dataset, PipelineSpec, RawTable, SplitDataset};
pub use experiment::{ExperimentConfig, ExperimentError};
pub use federated::{FederationConfig, RoundRecord};
pub use gbdt::{BoostConfig, BoostedEnsemble};
pub use metrics::{ConfusionMatrix, RocCurve, RoundMetrics};
pub use nn::{Gradients, ModelParams, TrainConfig};
