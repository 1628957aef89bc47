use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{Gradients, Matrix, ModelParams};
use super::{NnError, Result};
use crate::data::ClientPartition;
use crate::seed::{rng_for, stream};

/// Probabilities are clamped to `[eps, 1 - eps]` before taking logs.
pub const PROB_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    pub proximal_mu: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 32,
            local_epochs: 10,
            proximal_mu: 0.1,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NnError::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.proximal_mu >= 0.0 && self.proximal_mu.is_finite()) {
            return Err(NnError::InvalidConfig("proximal_mu must be non-negative".into()));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Activations of every layer, input included. Hidden layers are ReLU, the
/// last layer is sigmoid.
fn activations(model: &ModelParams, batch: &Matrix) -> Result<Vec<Vec<f64>>> {
    if batch.cols() != model.input_dim() {
        return Err(NnError::DimensionMismatch(format!(
            "batch width {} but model expects {}",
            batch.cols(),
            model.input_dim()
        )));
    }
    let n = batch.rows();
    let last = model.layers().len() - 1;
    let mut acts = Vec::with_capacity(model.layers().len() + 1);
    acts.push((0..n).flat_map(|i| batch.row(i).iter().copied()).collect::<Vec<f64>>());
    for (li, layer) in model.layers().iter().enumerate() {
        let (inp, out) = (layer.inputs(), layer.outputs());
        let prev = &acts[li];
        let mut next = vec![0.0; n * out];
        for r in 0..n {
            let x = &prev[r * inp..(r + 1) * inp];
            for o in 0..out {
                let w = &layer.weights[o * inp..(o + 1) * inp];
                let z = layer.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                next[r * out + o] = if li == last { sigmoid(z) } else { z.max(0.0) };
            }
        }
        acts.push(next);
    }
    Ok(acts)
}

/// Per-row positive-class probabilities.
pub fn forward(model: &ModelParams, batch: &Matrix) -> Result<Vec<f64>> {
    if model.layers().last().map(|l| l.outputs()) != Some(1) {
        return Err(NnError::DimensionMismatch("output layer must have one unit".into()));
    }
    Ok(activations(model, batch)?.pop().unwrap_or_default())
}

/// Mean binary cross-entropy.
pub fn bce_loss(probabilities: &[f64], labels: &[u8]) -> Result<f64> {
    if probabilities.len() != labels.len() {
        return Err(NnError::DimensionMismatch(format!(
            "{} probabilities vs {} labels",
            probabilities.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / labels.len() as f64)
}

/// Gradient of the mean BCE of `batch` w.r.t. every parameter.
pub fn backward(model: &ModelParams, batch: &Matrix, labels: &[u8]) -> Result<Gradients> {
    if labels.len() != batch.rows() {
        return Err(NnError::DimensionMismatch(format!(
            "{} rows vs {} labels",
            batch.rows(),
            labels.len()
        )));
    }
    if model.layers().last().map(|l| l.outputs()) != Some(1) {
        return Err(NnError::DimensionMismatch("output layer must have one unit".into()));
    }
    let n = batch.rows();
    let mut grads = Gradients::zeros_like(model);
    if n == 0 {
        return Ok(grads);
    }
    let acts = activations(model, batch)?;
    let scale = 1.0 / n as f64;
    // dL/dz at the sigmoid output.
    let mut delta: Vec<f64> = acts
        .last()
        .unwrap()
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - f64::from(y)) * scale)
        .collect();

    let g_layers = grads.as_params_mut();
    let layers = model.layers();
    for li in (0..layers.len()).rev() {
        let layer = &layers[li];
        let (inp, out) = (layer.inputs(), layer.outputs());
        let a_prev = &acts[li];
        let mut gw = vec![0.0; inp * out];
        let mut gb = vec![0.0; out];
        for r in 0..n {
            let x = &a_prev[r * inp..(r + 1) * inp];
            for o in 0..out {
                let d = delta[r * out + o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, &xi) in gw[o * inp..(o + 1) * inp].iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
        }
        if li > 0 {
            let mut prev_delta = vec![0.0; n * inp];
            for r in 0..n {
                for i in 0..inp {
                    // ReLU subgradient is 0 at 0.
                    if a_prev[r * inp + i] > 0.0 {
                        prev_delta[r * inp + i] = (0..out).map(|o| delta[r * out + o] * layer.weight(o, i)).sum();
                    }
                }
            }
            delta = prev_delta;
        }
        let slot = g_layers.layer_mut(li);
        slot.weights = gw;
        slot.bias = gb;
    }
    Ok(grads)
}

/// `w <- w - lr * g`.
pub fn sgd_step(model: &ModelParams, grads: &Gradients, lr: f64) -> Result<ModelParams> {
    model.zip_with(grads.as_params(), |w, g| w - lr * g)
}

/// Gradient of `(mu / 2) * ||w - anchor||^2`, i.e. `mu * (w - anchor)`.
pub fn proximal_grad(model: &ModelParams, anchor: &ModelParams, mu: f64) -> Result<Gradients> {
    Ok(Gradients::from_params(model.zip_with(anchor, |w, a| mu * (w - a))?))
}

/// Local FedProx objective `F_k(w) + (mu/2) ||w - anchor||^2` on one batch.
pub fn fedprox_objective(
    model: &ModelParams,
    batch: &Matrix,
    labels: &[u8],
    anchor: &ModelParams,
    mu: f64,
) -> Result<f64> {
    let loss = bce_loss(&forward(model, batch)?, labels)?;
    Ok(loss + 0.5 * mu * model.squared_distance(anchor)?)
}

/// One step on the FedProx objective with the proximal term taken
/// implicitly: `w' = w - lr * (g + mu * (w' - anchor))`. Unlike the explicit
/// step this stays contractive toward the anchor for any `lr * mu`.
fn proximal_step(
    model: &ModelParams,
    grads: &Gradients,
    anchor: &ModelParams,
    lr: f64,
    mu: f64,
) -> Result<ModelParams> {
    let denom = 1.0 + lr * mu;
    let stepped = sgd_step(model, grads, lr)?;
    stepped.zip_with(anchor, |s, a| (s + lr * mu * a) / denom)
}

/// Runs `local_epochs` epochs of mini-batch SGD on the client's data against
/// the FedProx objective anchored at `anchor`.
///
/// Batch order is reshuffled every epoch from a stream derived from
/// `(config.seed, client id, round)`.
pub fn train_local(
    model: &ModelParams,
    data: &ClientPartition,
    anchor: &ModelParams,
    config: &TrainConfig,
    round: usize,
) -> Result<ModelParams> {
    config.validate()?;
    model.check_congruent(anchor)?;
    let ds = data.data();
    if ds.is_empty() {
        return Err(NnError::EmptyPartition);
    }
    if ds.width() != model.input_dim() {
        return Err(NnError::DimensionMismatch(format!(
            "partition width {} but model expects {}",
            ds.width(),
            model.input_dim()
        )));
    }
    let mut w = model.clone();
    if config.local_epochs == 0 {
        return Ok(w);
    }
    let mut rng = rng_for(
        config.seed,
        &[stream::LOCAL_TRAIN, data.client_id() as u64, round as u64],
    );
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut buf = Vec::new();
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    for _ in 0..config.local_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            ds.features.rows_as_f64(chunk, &mut buf);
            let x = Matrix::new(chunk.len(), ds.width(), std::mem::take(&mut buf))?;
            batch_labels.clear();
            batch_labels.extend(chunk.iter().map(|&i| ds.labels[i]));
            let g = backward(&w, &x, &batch_labels)?;
            w = if config.proximal_mu > 0.0 {
                proximal_step(&w, &g, anchor, config.learning_rate, config.proximal_mu)?
            } else {
                sgd_step(&w, &g, config.learning_rate)?
            };
            buf = x.into_data();
        }
    }
    Ok(w)
}
