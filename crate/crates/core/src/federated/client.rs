use super::Result;
use crate::data::ClientPartition;
use crate::nn::{train_local, ModelParams, TrainConfig};

/// What a client sends back after local training: its parameters and `n_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: i64,
    pub params: ModelParams,
    pub n_k: usize,
}

/// The surface a client exposes to the server.
pub trait FederatedClient: Sync {
    fn client_id(&self) -> i64;

    fn num_samples(&self) -> usize;

    /// Trains on private data starting from (and anchored at) `global`.
    fn fit(&self, global: &ModelParams, config: &TrainConfig, round: usize) -> Result<ClientUpdate>;
}

impl FederatedClient for ClientPartition {
    fn client_id(&self) -> i64 {
        ClientPartition::client_id(self)
    }

    fn num_samples(&self) -> usize {
        self.n_k()
    }

    fn fit(&self, global: &ModelParams, config: &TrainConfig, round: usize) -> Result<ClientUpdate> {
        let params = train_local(global, self, global, config, round)?;
        Ok(ClientUpdate {
            client_id: self.client_id(),
            params,
            n_k: self.n_k(),
        })
    }
}
