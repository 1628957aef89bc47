use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::client::{ClientUpdate, FederatedClient};
use super::{FedError, Result};
use crate::data::{BinaryMatrix, Dataset};
use crate::metrics::{evaluate_scores, RoundMetrics};
use crate::nn::{forward, init_model, Matrix, ModelParams, TrainConfig};
use crate::seed::{rng_for, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Local objective with the proximal term.
    #[default]
    FedProx,
    /// Plain local SGD; `proximal_mu` is ignored.
    FedAvg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FederationConfig {
    pub num_rounds: usize,
    pub fraction_fit: f64,
    pub min_fit_clients: usize,
    pub proximal_mu: f64,
    pub strategy: Strategy,
    /// Hidden layer widths; input width comes from the data, output is 1.
    pub hidden_layers: Vec<usize>,
    pub train: TrainConfig,
    pub seed: u64,
    /// Train the selected clients of a round on the rayon pool.
    pub parallel: bool,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            num_rounds: 20,
            fraction_fit: 0.2,
            min_fit_clients: 10,
            proximal_mu: 0.1,
            strategy: Strategy::FedProx,
            hidden_layers: vec![64, 32],
            train: TrainConfig::default(),
            seed: 42,
            parallel: true,
        }
    }
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction_fit > 0.0 && self.fraction_fit <= 1.0) {
            return Err(FedError::InvalidConfig(format!(
                "fraction_fit must lie in (0, 1], got {}",
                self.fraction_fit
            )));
        }
        if self.min_fit_clients == 0 {
            return Err(FedError::InvalidConfig("min_fit_clients must be positive".into()));
        }
        if !(self.proximal_mu >= 0.0 && self.proximal_mu.is_finite()) {
            return Err(FedError::InvalidConfig("proximal_mu must be non-negative".into()));
        }
        self.client_train_config().validate()?;
        Ok(())
    }

    /// The local training config clients receive: `proximal_mu` from the
    /// federation (zero under FedAvg).
    pub fn client_train_config(&self) -> TrainConfig {
        TrainConfig {
            proximal_mu: match self.strategy {
                Strategy::FedProx => self.proximal_mu,
                Strategy::FedAvg => 0.0,
            },
            ..self.train.clone()
        }
    }

    pub fn layer_dims(&self, input_width: usize) -> Vec<usize> {
        let mut dims = vec![input_width];
        dims.extend(&self.hidden_layers);
        dims.push(1);
        dims
    }

    pub fn clients_per_round(&self, available: usize) -> usize {
        ((self.fraction_fit * available as f64).round() as usize).max(self.min_fit_clients)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub global_model: ModelParams,
    pub metrics: RoundMetrics,
    pub participating_clients: Vec<i64>,
}

/// Samples `max(round(fraction_fit * K), min_fit_clients)` clients without
/// replacement from a stream keyed by `(seed, round)`. Output is ordered by
/// client id.
pub fn select_clients<'a, C: FederatedClient>(
    all: &'a [C],
    config: &FederationConfig,
    round: usize,
) -> Result<Vec<&'a C>> {
    if all.is_empty() {
        return Err(FedError::NoClients);
    }
    let count = config.clients_per_round(all.len());
    if count > all.len() {
        return Err(FedError::TooManyClients {
            requested: count,
            available: all.len(),
        });
    }
    let mut rng = rng_for(config.seed, &[stream::SELECT, round as u64]);
    let mut picked: Vec<&C> = index::sample(&mut rng, all.len(), count)
        .into_iter()
        .map(|i| &all[i])
        .collect();
    picked.sort_by_key(|c| c.client_id());
    Ok(picked)
}

/// Sample-weighted mean `sum_k (n_k / N) w_k`, summed in ascending client id
/// order.
pub fn aggregate(updates: &[ClientUpdate]) -> Result<ModelParams> {
    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);
    let first = *ordered.first().ok_or(FedError::EmptyUpdates)?;
    for pair in ordered.windows(2) {
        if pair[0].client_id == pair[1].client_id {
            return Err(FedError::DuplicateClient(pair[0].client_id));
        }
    }
    for u in &ordered {
        if u.n_k == 0 {
            return Err(FedError::ZeroSamples(u.client_id));
        }
        if !u.params.is_congruent(&first.params) {
            return Err(FedError::ShapeMismatch(format!(
                "client {} has dims {:?}, client {} has {:?}",
                u.client_id,
                u.params.layer_dims(),
                first.client_id,
                first.params.layer_dims()
            )));
        }
    }
    let total: usize = ordered.iter().map(|u| u.n_k).sum();
    let weight = |u: &ClientUpdate| u.n_k as f64 / total as f64;
    let w0 = weight(first);
    let mut acc = first.params.map(|v| w0 * v);
    for u in &ordered[1..] {
        let wk = weight(u);
        acc = acc.zip_with(&u.params, |a, v| a + wk * v)?;
    }
    Ok(acc)
}

/// One broadcast, train, aggregate cycle. Returns the new global model and the
/// participating client ids.
pub fn run_round<C: FederatedClient>(
    global: &ModelParams,
    clients: &[C],
    config: &FederationConfig,
    round: usize,
) -> Result<(ModelParams, Vec<i64>)> {
    let selected = select_clients(clients, config, round)?;
    let train = config.client_train_config();
    let updates: Vec<ClientUpdate> = if config.parallel {
        selected
            .par_iter()
            .map(|c| c.fit(global, &train, round))
            .collect::<Result<_>>()?
    } else {
        selected
            .iter()
            .map(|c| c.fit(global, &train, round))
            .collect::<Result<_>>()?
    };
    let ids = selected.iter().map(|c| c.client_id()).collect();
    Ok((aggregate(&updates)?, ids))
}

const PREDICT_CHUNK: usize = 4096;

/// Positive-class probabilities for every row of a binary feature matrix.
pub fn predict_dataset(model: &ModelParams, features: &BinaryMatrix) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..features.rows()).collect();
    let mut out = Vec::with_capacity(features.rows());
    let mut buf = Vec::new();
    for chunk in idx.chunks(PREDICT_CHUNK) {
        features.rows_as_f64(chunk, &mut buf);
        let x = Matrix::new(chunk.len(), features.cols(), std::mem::take(&mut buf))?;
        out.extend(forward(model, &x)?);
    }
    Ok(out)
}

/// Evaluates `model` on the server-held test set.
fn evaluate_global(model: &ModelParams, test_set: &Dataset) -> Result<RoundMetrics> {
    let scores = predict_dataset(model, &test_set.features)?;
    Ok(evaluate_scores(&scores, &test_set.labels)?)
}

/// Full training run; record `t` holds the post-aggregation model of round
/// `t` and its metrics on `test_set`.
pub fn run_federation<C: FederatedClient>(
    clients: &[C],
    test_set: &Dataset,
    config: &FederationConfig,
) -> Result<Vec<RoundRecord>> {
    config.validate()?;
    let dims = config.layer_dims(test_set.width());
    let mut global = init_model(&dims, config.seed)?;
    let mut history = Vec::with_capacity(config.num_rounds);
    for round in 1..=config.num_rounds {
        let (next, ids) = run_round(&global, clients, config, round)?;
        let metrics = evaluate_global(&next, test_set)?;
        global = next;
        history.push(RoundRecord {
            round,
            global_model: global.clone(),
            metrics,
            participating_clients: ids,
        });
    }
    Ok(history)
}

/// Round with the highest accuracy (earliest on ties).
pub fn best_round(history: &[RoundRecord]) -> Result<(usize, f64)> {
    let mut best: Option<&RoundRecord> = None;
    for r in history {
        if best.is_none_or(|b| r.metrics.accuracy > b.metrics.accuracy) {
            best = Some(r);
        }
    }
    best.map(|r| (r.round, r.metrics.accuracy))
        .ok_or(FedError::EmptyHistory)
}
