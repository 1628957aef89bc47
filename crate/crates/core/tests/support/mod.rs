//! Independent oracles shared by the integration and acceptance tests. None
//! of these call the library routine they check.
#![allow(dead_code)]

use edufl_core::data::{BinaryMatrix, Dataset};
use edufl_core::nn::{Layer, Matrix, ModelParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Straight-line forward pass: ReLU hidden layers, sigmoid output.
pub fn oracle_forward(model: &ModelParams, x: &[f64]) -> f64 {
    let mut a = x.to_vec();
    let n = model.layers().len();
    for (li, layer) in model.layers().iter().enumerate() {
        let mut z = vec![0.0; layer.outputs()];
        for (o, zo) in z.iter_mut().enumerate() {
            let mut s = layer.bias[o];
            for (i, ai) in a.iter().enumerate() {
                s += layer.weight(o, i) * ai;
            }
            *zo = s;
        }
        a = if li + 1 == n {
            z.iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect()
        } else {
            z.iter().map(|v| v.max(0.0)).collect()
        };
    }
    a[0]
}

/// Unclamped mean binary cross-entropy.
pub fn oracle_loss(model: &ModelParams, batch: &Matrix, labels: &[u8]) -> f64 {
    let total: f64 = (0..batch.rows())
        .map(|r| {
            let p = oracle_forward(model, batch.row(r));
            if labels[r] == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / batch.rows() as f64
}

/// Central differences of [`oracle_loss`], one entry per parameter in
/// [`ModelParams::values`] order.
pub fn fd_gradient(model: &ModelParams, batch: &Matrix, labels: &[u8], h: f64) -> Vec<f64> {
    let n = model.num_params();
    (0..n)
        .map(|k| {
            let mut plus = model.clone();
            *plus.values_mut().nth(k).unwrap() += h;
            let mut minus = model.clone();
            *minus.values_mut().nth(k).unwrap() -= h;
            (oracle_loss(&plus, batch, labels) - oracle_loss(&minus, batch, labels)) / (2.0 * h)
        })
        .collect()
}

/// Random net with dims drawn under `max_dims` (output fixed at 1) and
/// weights uniform in [-1, 1].
pub fn random_net(r: &mut impl Rng, max_dims: &[usize]) -> ModelParams {
    let mut dims: Vec<usize> = max_dims[..max_dims.len() - 1]
        .iter()
        .map(|&m| r.gen_range(1..=m))
        .collect();
    dims.push(1);
    let layers = dims
        .windows(2)
        .map(|w| {
            let (i, o) = (w[0], w[1]);
            let weights = (0..i * o).map(|_| r.gen_range(-1.0..1.0)).collect();
            let bias = (0..o).map(|_| r.gen_range(-0.5..0.5)).collect();
            Layer::new(i, o, weights, bias).unwrap()
        })
        .collect();
    ModelParams::from_layers(layers).unwrap()
}

pub fn random_batch(r: &mut impl Rng, rows: usize, cols: usize) -> (Matrix, Vec<u8>) {
    let data = (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect();
    let labels = (0..rows).map(|_| r.gen_range(0..2u8)).collect();
    (Matrix::new(rows, cols, data).unwrap(), labels)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Minimiser of `G w + (H + lambda) w^2 / 2` by successively refined grid
/// search. Each pass evaluates the objective relative to the current centre
/// `c`, `f(c + d) - f(c) = (G + (H + lambda) c) d + (H + lambda) d^2 / 2`, so
/// the comparison keeps full precision as the grid shrinks.
pub fn grid_min_leaf(g: f64, h: f64, lambda: f64) -> f64 {
    let a = h + lambda;
    let mut c = 0.0;
    let mut half_span = 1e7;
    for _ in 0..80 {
        let slope = g + a * c;
        let step = half_span / 100.0;
        let mut best = (0.0, 0.0);
        for k in -100..=100 {
            let d = step * k as f64;
            let v = slope * d + 0.5 * a * d * d;
            if v < best.1 {
                best = (d, v);
            }
        }
        c += best.0;
        half_span = step;
        if half_span < 1e-300 {
            break;
        }
    }
    c
}

/// Minimum over w of the second-order leaf objective for the given rows,
/// evaluated by row sums at the grid minimiser.
fn leaf_objective(rows: &[usize], g: &[f64], h: &[f64], lambda: f64) -> f64 {
    let gs: f64 = rows.iter().map(|&i| g[i]).sum();
    let hs: f64 = rows.iter().map(|&i| h[i]).sum();
    let w = grid_min_leaf(gs, hs, lambda);
    rows.iter().map(|&i| g[i] * w + 0.5 * h[i] * w * w).sum::<f64>() + 0.5 * lambda * w * w
}

/// Result of exhaustive depth-1 search: the best objective decrease and
/// every feature that attains it (within `tol`), or `None` if no admissible
/// split has positive decrease.
pub struct SplitOracle {
    pub best_gain: f64,
    pub optimal_features: Vec<usize>,
}

pub fn exhaustive_split(
    x: &BinaryMatrix,
    g: &[f64],
    h: &[f64],
    lambda: f64,
    gamma: f64,
    min_child_weight: f64,
    tol: f64,
) -> Option<SplitOracle> {
    let all: Vec<usize> = (0..x.rows()).collect();
    let parent = leaf_objective(&all, g, h, lambda);
    let mut gains = Vec::new();
    for j in 0..x.cols() {
        let (left, right): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x.get(i, j) == 0);
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let hl: f64 = left.iter().map(|&i| h[i]).sum();
        let hr: f64 = right.iter().map(|&i| h[i]).sum();
        if hl < min_child_weight || hr < min_child_weight {
            continue;
        }
        let drop = parent - leaf_objective(&left, g, h, lambda) - leaf_objective(&right, g, h, lambda) - gamma;
        gains.push((j, drop));
    }
    let best = gains.iter().map(|&(_, d)| d).fold(f64::NEG_INFINITY, f64::max);
    if best.is_nan() || best <= tol {
        return None;
    }
    Some(SplitOracle {
        best_gain: best,
        optimal_features: gains
            .iter()
            .filter(|&&(_, d)| d >= best - tol)
            .map(|&(j, _)| j)
            .collect(),
    })
}

/// Pairwise-concordance AUC: share of (positive, negative) pairs ordered
/// correctly, ties counted one half.
pub fn concordance_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut pairs = 0.0;
    let mut score = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                score += 1.0;
            } else if si == sj {
                score += 0.5;
            }
        }
    }
    score / pairs
}

/// Per-coordinate weighted mean `sum(n_k w_k) / sum(n_k)`.
pub fn weighted_mean(updates: &[(Vec<f64>, usize)]) -> Vec<f64> {
    let total: f64 = updates.iter().map(|(_, n)| *n as f64).sum();
    let len = updates[0].0.len();
    (0..len)
        .map(|c| updates.iter().map(|(w, n)| w[c] * *n as f64).sum::<f64>() / total)
        .collect()
}

/// Full-batch gradient descent on an L2-free logistic regression; returns
/// the training-set accuracy of the fitted model on `eval`.
pub fn logistic_fit_accuracy(train: &Dataset, eval: &Dataset, epochs: usize, lr: f64) -> f64 {
    let d = train.width();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let n = train.len() as f64;
    for _ in 0..epochs {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for i in 0..train.len() {
            let row = train.features.row(i);
            let z: f64 = b + row.iter().zip(&w).map(|(&x, wj)| f64::from(x) * wj).sum::<f64>();
            let err = 1.0 / (1.0 + (-z).exp()) - f64::from(train.labels[i]);
            gb += err;
            for (gj, &x) in gw.iter_mut().zip(row) {
                *gj += err * f64::from(x);
            }
        }
        b -= lr * gb / n;
        for (wj, gj) in w.iter_mut().zip(&gw) {
            *wj -= lr * gj / n;
        }
    }
    let correct = (0..eval.len())
        .filter(|&i| {
            let row = eval.features.row(i);
            let z: f64 = b + row.iter().zip(&w).map(|(&x, wj)| f64::from(x) * wj).sum::<f64>();
            u8::from(z > 0.0) == eval.labels[i]
        })
        .count();
    correct as f64 / eval.len() as f64
}

/// Random binary dataset with the given shape and labels.
pub fn random_dataset(r: &mut impl Rng, rows: usize, cols: usize) -> Dataset {
    let data = (0..rows * cols).map(|_| r.gen_range(0..2u8)).collect();
    let mut labels: Vec<u8> = (0..rows).map(|_| r.gen_range(0..2u8)).collect();
    // both classes present
    labels[0] = 0;
    labels[rows - 1] = 1;
    Dataset::new(
        BinaryMatrix::new(rows, cols, data).unwrap(),
        labels,
        vec![1; rows],
        (0..cols).map(|j| format!("f{j}")).collect(),
    )
    .unwrap()
}
