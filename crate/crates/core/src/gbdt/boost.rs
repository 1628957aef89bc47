use serde::{Deserialize, Serialize};

use super::tree::{build_tree, grad_hess, TreeNode};
use super::{GbdtError, Result};
use crate::data::{BinaryMatrix, Dataset};
use crate::metrics::DECISION_THRESHOLD;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Recorded for reproducibility; training has no sampling so it is unused.
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 6,
            eta: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 42,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GbdtError::InvalidConfig(m.to_string()));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be non-negative");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedEnsemble {
    pub trees: Vec<TreeNode>,
    pub base_score: f64,
    pub config: BoostConfig,
    pub feature_names: Vec<String>,
}

impl BoostedEnsemble {
    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    /// Raw margins using the first `n_trees` trees (all when `None`).
    pub fn margins(&self, features: &BinaryMatrix, n_trees: Option<usize>) -> Result<Vec<f64>> {
        if features.cols() != self.width() {
            return Err(GbdtError::WidthMismatch {
                expected: self.width(),
                found: features.cols(),
            });
        }
        let k = n_trees.unwrap_or(self.trees.len()).min(self.trees.len());
        let eta = self.config.eta;
        Ok((0..features.rows())
            .map(|i| {
                let row = features.row(i);
                self.trees[..k]
                    .iter()
                    .fold(self.base_score, |m, t| m + eta * t.predict_row(row))
            })
            .collect())
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

/// Mean logistic loss evaluated on margins, `softplus(m) - y m`.
pub fn log_loss(margins: &[f64], labels: &[u8]) -> f64 {
    let softplus = |m: f64| m.max(0.0) + (-m.abs()).exp().ln_1p();
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| softplus(m) - f64::from(y) * m)
        .sum();
    total / margins.len() as f64
}

pub fn fit(train: &Dataset, config: &BoostConfig) -> Result<BoostedEnsemble> {
    fit_with_trace(train, config).map(|(model, _)| model)
}

/// Also returns the training loss before the first tree and after each one.
pub fn fit_with_trace(train: &Dataset, config: &BoostConfig) -> Result<(BoostedEnsemble, Vec<f64>)> {
    config.validate()?;
    let [neg, pos] = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(GbdtError::SingleClass);
    }
    let prior = pos as f64 / train.len() as f64;
    let base_score = (prior / (1.0 - prior)).ln();

    let mut margins = vec![base_score; train.len()];
    let mut trace = Vec::with_capacity(config.n_trees + 1);
    trace.push(log_loss(&margins, &train.labels));
    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        let p: Vec<f64> = margins.iter().map(|&m| sigmoid(m)).collect();
        let (g, h) = grad_hess(&p, &train.labels);
        let tree = build_tree(&train.features, &g, &h, config)?;
        for (i, m) in margins.iter_mut().enumerate() {
            *m += config.eta * tree.predict_row(train.features.row(i));
        }
        trace.push(log_loss(&margins, &train.labels));
        trees.push(tree);
    }
    let model = BoostedEnsemble {
        trees,
        base_score,
        config: config.clone(),
        feature_names: train.feature_names.clone(),
    };
    Ok((model, trace))
}

/// Probabilities and hard labels (`p > 0.5`).
pub fn predict(model: &BoostedEnsemble, features: &BinaryMatrix) -> Result<(Vec<f64>, Vec<u8>)> {
    let probs: Vec<f64> = model.margins(features, None)?.into_iter().map(sigmoid).collect();
    let labels = probs.iter().map(|&p| u8::from(p > DECISION_THRESHOLD)).collect();
    Ok((probs, labels))
}

/// Total split gain per feature, descending; ties ordered by feature index.
/// Features never used for a split are omitted.
pub fn feature_importance(model: &BoostedEnsemble) -> Vec<(String, f64)> {
    let mut gains = vec![0.0; model.width()];
    let mut used = vec![false; model.width()];
    for tree in &model.trees {
        tree.for_each_split(&mut |f, g| {
            gains[f] += g;
            used[f] = true;
        });
    }
    let mut ranked: Vec<usize> = (0..gains.len()).filter(|&f| used[f]).collect();
    ranked.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    ranked
        .into_iter()
        .map(|f| (model.feature_names[f].clone(), gains[f]))
        .collect()
}
