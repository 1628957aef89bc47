use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::boost::{BoostConfig, BoostedEnsemble};
use super::tree::TreeNode;
use super::{GbdtError, Result};

pub const MODEL_TAG: &str = "edufl-gbdt v1";

fn node_count(node: &TreeNode) -> usize {
    node.num_leaves() * 2 - 1
}

fn dump_node(node: &TreeNode, id: usize, out: &mut String) {
    match node {
        TreeNode::Leaf { weight } => {
            let _ = writeln!(out, "{id} leaf:{weight:.16e}");
        }
        TreeNode::Split {
            feature,
            gain,
            left,
            right,
        } => {
            let right_id = id + 1 + node_count(left);
            let _ = writeln!(out, "{id} {feature}:{},{right_id} {gain:.16e}", id + 1);
            dump_node(left, id + 1, out);
            dump_node(right, right_id, out);
        }
    }
}

/// Text form: header, base score, config, feature names, then one preorder
/// node per line. Floats use 17 significant digits and reload bit-exactly.
pub fn dump_model(model: &BoostedEnsemble) -> String {
    let c = &model.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_TAG}");
    let _ = writeln!(out, "base_score {:.16e}", model.base_score);
    let _ = writeln!(
        out,
        "config n_trees={} max_depth={} eta={} lambda={} gamma={} min_child_weight={} seed={}",
        c.n_trees, c.max_depth, c.eta, c.lambda, c.gamma, c.min_child_weight, c.seed
    );
    let _ = writeln!(out, "features {}", model.feature_names.len());
    for (i, name) in model.feature_names.iter().enumerate() {
        let _ = writeln!(out, "{i} {name}");
    }
    for (k, tree) in model.trees.iter().enumerate() {
        let _ = writeln!(out, "booster[{k}] {}", node_count(tree));
        dump_node(tree, 0, &mut out);
    }
    out
}

pub fn store_model(model: &BoostedEnsemble, path: &Path) -> Result<()> {
    fs::write(path, dump_model(model))?;
    Ok(())
}

fn err(line: usize, msg: impl std::fmt::Display) -> GbdtError {
    GbdtError::Dump(format!("line {line}: {msg}"))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l)
            }
            None => Err(err(self.last + 1, "unexpected end of file")),
        }
    }

    fn field<'b>(&self, line: &'b str, key: &str) -> Result<&'b str> {
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| err(self.last, format!("expected `{key}`")))
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| err(line, format!("bad number `{s}`")))
}

enum Raw {
    Leaf(f64),
    Split(usize, usize, usize, f64),
}

fn assemble(nodes: &[Option<Raw>], id: usize, line: usize, budget: usize) -> Result<TreeNode> {
    if budget == 0 {
        return Err(err(line, "cyclic tree"));
    }
    match nodes.get(id).and_then(Option::as_ref) {
        None => Err(err(line, format!("missing node {id}"))),
        Some(Raw::Leaf(w)) => Ok(TreeNode::Leaf { weight: *w }),
        Some(&Raw::Split(feature, l, r, gain)) => Ok(TreeNode::Split {
            feature,
            gain,
            left: Box::new(assemble(nodes, l, line, budget - 1)?),
            right: Box::new(assemble(nodes, r, line, budget - 1)?),
        }),
    }
}

pub fn parse_model(text: &str) -> Result<BoostedEnsemble> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    if lines.next()? != MODEL_TAG {
        return Err(err(1, format!("expected header `{MODEL_TAG}`")));
    }
    let l = lines.next()?;
    let base_score = num(lines.field(l, "base_score")?, lines.last)?;

    let l = lines.next()?;
    let mut config = BoostConfig::default();
    for kv in lines.field(l, "config")?.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| err(lines.last, "bad config entry"))?;
        let at = lines.last;
        match k {
            "n_trees" => config.n_trees = num(v, at)?,
            "max_depth" => config.max_depth = num(v, at)?,
            "eta" => config.eta = num(v, at)?,
            "lambda" => config.lambda = num(v, at)?,
            "gamma" => config.gamma = num(v, at)?,
            "min_child_weight" => config.min_child_weight = num(v, at)?,
            "seed" => config.seed = num(v, at)?,
            _ => return Err(err(at, format!("unknown config key `{k}`"))),
        }
    }

    let l = lines.next()?;
    let width: usize = num(lines.field(l, "features")?, lines.last)?;
    let mut feature_names = Vec::with_capacity(width);
    for i in 0..width {
        let l = lines.next()?;
        feature_names.push(lines.field(l, &i.to_string())?.to_string());
    }

    let mut trees = Vec::new();
    while let Some((i, header)) = lines.inner.next() {
        lines.last = i + 1;
        let at = lines.last;
        let count: usize = num(lines.field(header, &format!("booster[{}]", trees.len()))?, at)?;
        let mut nodes: Vec<Option<Raw>> = (0..count).map(|_| None).collect();
        for _ in 0..count {
            let l = lines.next()?;
            let at = lines.last;
            let (id, rest) = l.split_once(' ').ok_or_else(|| err(at, "bad node"))?;
            let id: usize = num(id, at)?;
            let raw = if let Some(w) = rest.strip_prefix("leaf:") {
                Raw::Leaf(num(w, at)?)
            } else {
                let (split, gain) = rest.split_once(' ').ok_or_else(|| err(at, "bad split"))?;
                let (f, children) = split.split_once(':').ok_or_else(|| err(at, "bad split"))?;
                let (l, r) = children.split_once(',').ok_or_else(|| err(at, "bad split"))?;
                let feature: usize = num(f, at)?;
                if feature >= width {
                    return Err(err(at, format!("feature {feature} out of range")));
                }
                Raw::Split(feature, num(l, at)?, num(r, at)?, num(gain, at)?)
            };
            let slot = nodes
                .get_mut(id)
                .ok_or_else(|| err(at, format!("node id {id} out of range")))?;
            if slot.replace(raw).is_some() {
                return Err(err(at, format!("duplicate node {id}")));
            }
        }
        trees.push(assemble(&nodes, 0, at, count)?);
    }
    if trees.len() != config.n_trees {
        return Err(GbdtError::Dump(format!(
            "config declares {} trees, found {}",
            config.n_trees,
            trees.len()
        )));
    }
    Ok(BoostedEnsemble {
        trees,
        base_score,
        config,
        feature_names,
    })
}

pub fn load_model(path: &Path) -> Result<BoostedEnsemble> {
    parse_model(&fs::read_to_string(path)?)
}
