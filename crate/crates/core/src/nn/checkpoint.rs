//! Textual model checkpoints.
//!
//! ```text
//! edufl-model v1
//! dims 54 64 32 1
//! weights 0 <outputs*inputs values, row-major>
//! bias 0 <outputs values>
//! ...
//! ```
//!
//! Values are written with 17 significant digits so `load(store(m)) == m`
//! bit for bit.

use std::io::{BufRead, BufReader, Read, Write};

use super::model::{Layer, ModelParams};
use super::{NnError, Result};

pub const CHECKPOINT_TAG: &str = "edufl-model v1";

pub fn store_checkpoint<W: Write>(model: &ModelParams, mut out: W) -> Result<()> {
    writeln!(out, "{CHECKPOINT_TAG}")?;
    let dims: Vec<String> = model.layer_dims().iter().map(usize::to_string).collect();
    writeln!(out, "dims {}", dims.join(" "))?;
    for (i, layer) in model.layers().iter().enumerate() {
        write!(out, "weights {i}")?;
        for w in &layer.weights {
            write!(out, " {w:.16e}")?;
        }
        writeln!(out)?;
        write!(out, "bias {i}")?;
        for b in &layer.bias {
            write!(out, " {b:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> NnError {
    NnError::Checkpoint(msg.into())
}

fn parse_values(line: &str, key: &str, index: usize, expected: usize) -> Result<Vec<f64>> {
    let mut parts = line.split_ascii_whitespace();
    if parts.next() != Some(key) || parts.next() != Some(index.to_string().as_str()) {
        return Err(bad(format!("expected `{key} {index}`")));
    }
    let vals = parts
        .map(|p| p.parse::<f64>().map_err(|_| bad(format!("bad number `{p}`"))))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != expected {
        return Err(bad(format!(
            "{key} {index}: {} values, expected {expected}",
            vals.len()
        )));
    }
    Ok(vals)
}

pub fn load_checkpoint<R: Read>(input: R) -> Result<ModelParams> {
    let mut lines = BufReader::new(input).lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| bad(format!("missing {what}")))?
            .map_err(NnError::from)
    };
    if next("header")?.trim() != CHECKPOINT_TAG {
        return Err(bad(format!("unsupported format, expected `{CHECKPOINT_TAG}`")));
    }
    let dims_line = next("dims")?;
    let mut parts = dims_line.split_ascii_whitespace();
    if parts.next() != Some("dims") {
        return Err(bad("expected `dims`"));
    }
    let dims = parts
        .map(|p| p.parse::<usize>().map_err(|_| bad(format!("bad dim `{p}`"))))
        .collect::<Result<Vec<_>>>()?;
    if dims.len() < 2 {
        return Err(bad("need at least two dims"));
    }
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (i, w) in dims.windows(2).enumerate() {
        let weights = parse_values(&next("weights")?, "weights", i, w[0] * w[1])?;
        let bias = parse_values(&next("bias")?, "bias", i, w[1])?;
        layers.push(Layer::new(w[0], w[1], weights, bias)?);
    }
    ModelParams::from_layers(layers)
}
