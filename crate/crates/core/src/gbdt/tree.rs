use super::boost::BoostConfig;
use super::{GbdtError, Result};
use crate::data::BinaryMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    /// Rows with `feature == 0` go left.
    Split {
        feature: usize,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict_row(&self, row: &[u8]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature, left, right, ..
                } => node = if row[*feature] == 0 { left } else { right },
            }
        }
    }

    /// Number of split levels on the longest path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.num_leaves() + right.num_leaves(),
        }
    }

    pub fn num_splits(&self) -> usize {
        self.num_leaves() - 1
    }

    /// Visits `(feature, gain)` of every split in preorder.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize, f64)) {
        if let TreeNode::Split {
            feature,
            gain,
            left,
            right,
        } = self
        {
            f(*feature, *gain);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }
}

/// First and second derivatives of the logistic loss w.r.t. the margin.
pub fn grad_hess(predictions: &[f64], labels: &[u8]) -> (Vec<f64>, Vec<f64>) {
    predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - f64::from(y), p * (1.0 - p)))
        .unzip()
}

pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> Result<f64> {
    let denom = h + lambda;
    if denom.is_nan() || denom <= 0.0 {
        return Err(GbdtError::ZeroCurvature(denom));
    }
    Ok(-g / denom)
}

pub fn split_gain(g_l: f64, h_l: f64, g_r: f64, h_r: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(g_l, h_l) + score(g_r, h_r) - score(g_l + g_r, h_l + h_r)) - gamma
}

struct Grower<'a> {
    features: &'a BinaryMatrix,
    g: &'a [f64],
    h: &'a [f64],
    config: &'a BoostConfig,
}

#[derive(Default, Clone, Copy)]
struct Side {
    g: f64,
    h: f64,
    n: usize,
}

impl Side {
    fn add(&mut self, g: f64, h: f64) {
        self.g += g;
        self.h += h;
        self.n += 1;
    }
}

impl Grower<'_> {
    fn leaf(&self, rows: &[usize]) -> TreeNode {
        let (g, h) = rows
            .iter()
            .fold((0.0, 0.0), |(g, h), &i| (g + self.g[i], h + self.h[i]));
        // H + lambda == 0 only when every row is saturated with lambda = 0.
        TreeNode::Leaf {
            weight: leaf_weight(g, h, self.config.lambda).unwrap_or(0.0),
        }
    }

    /// Best `(feature, gain)` with positive gain, smallest index on ties.
    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let width = self.features.cols();
        let mut zero = vec![Side::default(); width];
        let mut one = vec![Side::default(); width];
        for &i in rows {
            let (g, h) = (self.g[i], self.h[i]);
            for (j, &v) in self.features.row(i).iter().enumerate() {
                if v == 0 {
                    zero[j].add(g, h);
                } else {
                    one[j].add(g, h);
                }
            }
        }
        let c = self.config;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..width {
            let (l, r) = (zero[j], one[j]);
            if l.n == 0 || r.n == 0 || l.h < c.min_child_weight || r.h < c.min_child_weight {
                continue;
            }
            if !(l.h + c.lambda > 0.0 && r.h + c.lambda > 0.0) {
                continue;
            }
            let gain = split_gain(l.g, l.h, r.g, r.h, c.lambda, c.gamma);
            if gain > 0.0 && best.is_none_or(|(_, b)| gain > b) {
                best = Some((j, gain));
            }
        }
        best
    }

    fn grow(&self, rows: &[usize], depth: usize) -> TreeNode {
        if rows.is_empty() {
            return TreeNode::Leaf { weight: 0.0 };
        }
        if depth >= self.config.max_depth {
            return self.leaf(rows);
        }
        match self.best_split(rows) {
            None => self.leaf(rows),
            Some((feature, gain)) => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.features.get(i, feature) == 0);
                TreeNode::Split {
                    feature,
                    gain,
                    left: Box::new(self.grow(&left, depth + 1)),
                    right: Box::new(self.grow(&right, depth + 1)),
                }
            }
        }
    }
}

/// Greedy depth-first growth on binary features.
pub fn build_tree(features: &BinaryMatrix, g: &[f64], h: &[f64], config: &BoostConfig) -> Result<TreeNode> {
    if g.len() != features.rows() || h.len() != features.rows() {
        return Err(GbdtError::LengthMismatch(format!(
            "{} rows, {} gradients, {} hessians",
            features.rows(),
            g.len(),
            h.len()
        )));
    }
    let rows: Vec<usize> = (0..features.rows()).collect();
    let grower = Grower { features, g, h, config };
    Ok(grower.grow(&rows, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(max_depth: usize) -> BoostConfig {
        BoostConfig {
            max_depth,
            min_child_weight: 0.0,
            ..BoostConfig::default()
        }
    }

    #[test]
    fn grad_hess_examples() {
        let (g, h) = grad_hess(&[0.5], &[1]);
        assert_eq!((g[0], h[0]), (-0.5, 0.25));
        let (g, _) = grad_hess(&[1.0, 0.0], &[1, 0]);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn leaf_weight_examples() {
        assert!((leaf_weight(2.0, 4.0, 1.0).unwrap() + 0.4).abs() < 1e-15);
        assert_eq!(leaf_weight(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert!(leaf_weight(5.0, 1.0, 1e12).unwrap().abs() < 1e-11);
        assert!(matches!(leaf_weight(1.0, 0.0, 0.0), Err(GbdtError::ZeroCurvature(_))));
    }

    #[test]
    fn split_gain_examples() {
        assert_eq!(split_gain(1.0, 1.0, 1.0, 1.0, 0.0, 0.0), 0.0);
        assert_eq!(split_gain(-2.0, 2.0, 2.0, 2.0, 0.0, 0.0), 2.0);
        let base = split_gain(0.3, 1.2, -0.8, 0.7, 1.0, 0.0);
        assert!((split_gain(0.3, 1.2, -0.8, 0.7, 1.0, 5.0) - (base - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn split_gain_equals_objective_drop() {
        // Objective of a leaf at its optimum: G w + (H + lambda) w^2 / 2.
        let obj = |g: f64, h: f64, l: f64| {
            let w = leaf_weight(g, h, l).unwrap();
            g * w + 0.5 * (h + l) * w * w
        };
        let (gl, hl, gr, hr, l) = (-2.0, 2.0, 2.0, 2.0, 0.0);
        let drop = obj(gl + gr, hl + hr, l) - obj(gl, hl, l) - obj(gr, hr, l);
        assert!((drop - split_gain(gl, hl, gr, hr, l, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_gradients_give_single_zero_leaf() {
        let x = BinaryMatrix::new(4, 2, vec![0, 1, 1, 0, 1, 1, 0, 0]).unwrap();
        let t = build_tree(&x, &[0.0; 4], &[0.25; 4], &cfg(3)).unwrap();
        assert_eq!(t, TreeNode::Leaf { weight: 0.0 });
    }

    #[test]
    fn separating_feature_is_chosen() {
        // feature 1 separates the gradient signs, feature 0 is noise.
        let x = BinaryMatrix::new(4, 3, vec![0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 1, 0]).unwrap();
        let g = [0.5, 0.5, -0.5, -0.5];
        let t = build_tree(&x, &g, &[0.25; 4], &cfg(1)).unwrap();
        match t {
            TreeNode::Split { feature, .. } => assert_eq!(feature, 1),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn depth_zero_is_stump_leaf() {
        let x = BinaryMatrix::new(3, 1, vec![0, 1, 1]).unwrap();
        let g = [0.2, -0.6, 0.1];
        let h = [0.2, 0.3, 0.1];
        let t = build_tree(&x, &g, &h, &cfg(0)).unwrap();
        let want = leaf_weight(-0.3, 0.6, 1.0).unwrap();
        match t {
            TreeNode::Leaf { weight } => assert!((weight - want).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ties_go_to_smallest_index() {
        // columns 0 and 2 are identical
        let x = BinaryMatrix::new(4, 3, vec![1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 1, 0]).unwrap();
        let g = [-0.5, -0.5, 0.5, 0.5];
        let t = build_tree(&x, &g, &[0.25; 4], &cfg(1)).unwrap();
        assert!(matches!(t, TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn min_child_weight_blocks_light_children() {
        let x = BinaryMatrix::new(4, 1, vec![1, 0, 0, 0]).unwrap();
        let g = [-0.5, 0.5, 0.5, 0.5];
        let strict = BoostConfig {
            min_child_weight: 0.5,
            max_depth: 2,
            ..BoostConfig::default()
        };
        let t = build_tree(&x, &g, &[0.25; 4], &strict).unwrap();
        assert!(matches!(t, TreeNode::Leaf { .. }));
    }

    #[test]
    fn empty_input_is_zero_leaf() {
        let x = BinaryMatrix::with_width(3);
        assert_eq!(
            build_tree(&x, &[], &[], &cfg(2)).unwrap(),
            TreeNode::Leaf { weight: 0.0 }
        );
        assert!(build_tree(&x, &[1.0], &[], &cfg(2)).is_err());
    }
}
