use rand::Rng;

use super::{NnError, Result};
use crate::seed::{rng_for, stream};

/// Dense row-major matrix of reals; one row per example.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NnError::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NnError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// One affine layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(NnError::DimensionMismatch(format!(
                "layer {inputs}->{outputs} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }
}

/// Ordered layer stack of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

impl ModelParams {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NnError::InvalidModel("no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(NnError::InvalidModel(format!(
                    "layer outputs {} do not chain into inputs {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        let m = Self { layers };
        if m.values().any(|v| !v.is_finite()) {
            return Err(NnError::InvalidModel("non-finite parameter".into()));
        }
        Ok(m)
    }

    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        check_dims(layer_dims)?;
        Ok(Self {
            layers: layer_dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layer_mut(&mut self, li: usize) -> &mut Layer {
        &mut self.layers[li]
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].inputs];
        dims.extend(self.layers.iter().map(|l| l.outputs));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters in canonical order: per layer, weights then bias.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_congruent(&self, other: &Self) -> bool {
        self.layer_dims() == other.layer_dims()
    }

    pub(crate) fn check_congruent(&self, other: &Self) -> Result<()> {
        if self.is_congruent(other) {
            Ok(())
        } else {
            Err(NnError::DimensionMismatch(format!(
                "model dims {:?} vs {:?}",
                self.layer_dims(),
                other.layer_dims()
            )))
        }
    }

    /// Elementwise combination of two congruent parameter sets.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_congruent(other)?;
        let mut out = self.clone();
        for (o, b) in out.values_mut().zip(other.values()) {
            *o = f(*o, b);
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in out.values_mut() {
            *v = f(*v);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_congruent(other)?;
        Ok(self
            .values()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `true` when every parameter has the same bit pattern.
    pub fn bit_identical(&self, other: &Self) -> bool {
        self.is_congruent(other)
            && self
                .values()
                .zip(other.values())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn squared_distance(&self, other: &Self) -> Result<f64> {
        self.check_congruent(other)?;
        Ok(self.values().zip(other.values()).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

/// Gradient of a scalar loss w.r.t. every parameter of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(ModelParams);

impl Gradients {
    pub fn zeros_like(model: &ModelParams) -> Self {
        Self(model.map(|_| 0.0))
    }

    pub fn from_params(params: ModelParams) -> Self {
        Self(params)
    }

    pub fn as_params(&self) -> &ModelParams {
        &self.0
    }

    pub(crate) fn as_params_mut(&mut self) -> &mut ModelParams {
        &mut self.0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.values()
    }

    pub fn add(&self, other: &Gradients) -> Result<Gradients> {
        Ok(Self(self.0.zip_with(&other.0, |a, b| a + b)?))
    }

    pub fn max_abs(&self) -> f64 {
        self.values().map(f64::abs).fold(0.0, f64::max)
    }
}

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(NnError::InvalidModel("need at least input and output dims".into()));
    }
    if layer_dims.contains(&0) {
        return Err(NnError::InvalidModel(format!(
            "non-positive dimension in {layer_dims:?}"
        )));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(layer_dims: &[usize], seed: u64) -> Result<ModelParams> {
    check_dims(layer_dims)?;
    let mut rng = rng_for(seed, &[stream::INIT]);
    let layers = layer_dims
        .windows(2)
        .map(|w| {
            let (inp, out) = (w[0], w[1]);
            let limit = (6.0 / (inp + out) as f64).sqrt();
            let weights = (0..inp * out).map(|_| rng.gen_range(-limit..=limit)).collect();
            Layer {
                inputs: inp,
                outputs: out,
                weights,
                bias: vec![0.0; out],
            }
        })
        .collect();
    Ok(ModelParams { layers })
}
