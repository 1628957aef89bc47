mod support;

use edufl_core::data::{BinaryMatrix, Dataset};
use edufl_core::gbdt::{
    build_tree, dump_model, feature_importance, fit, fit_with_trace, grad_hess, leaf_weight, parse_model, predict,
    split_gain, BoostConfig, BoostedEnsemble, TreeNode,
};
use proptest::prelude::*;
use rand::Rng;
use support::{exhaustive_split, grid_min_leaf, random_dataset, relative_error, rng};

fn random_grad_problem(seed: u64) -> (BinaryMatrix, Vec<f64>, Vec<f64>, f64) {
    let mut r = rng(seed);
    let rows = r.gen_range(2..=16);
    let cols = r.gen_range(1..=3);
    let x = BinaryMatrix::new(rows, cols, (0..rows * cols).map(|_| r.gen_range(0..2u8)).collect()).unwrap();
    let p: Vec<f64> = (0..rows).map(|_| r.gen_range(0.05..0.95)).collect();
    let y: Vec<u8> = (0..rows).map(|_| r.gen_range(0..2u8)).collect();
    let (g, h) = grad_hess(&p, &y);
    let lambda = [0.0, 0.5, 1.0, 2.0][r.gen_range(0..4)];
    (x, g, h, lambda)
}

fn stump_config(lambda: f64) -> BoostConfig {
    BoostConfig {
        max_depth: 1,
        lambda,
        gamma: 0.0,
        min_child_weight: 0.0,
        ..BoostConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn depth_one_split_matches_exhaustive_search(seed in any::<u64>()) {
        let (x, g, h, lambda) = random_grad_problem(seed);
        let tree = build_tree(&x, &g, &h, &stump_config(lambda)).unwrap();
        match (exhaustive_split(&x, &g, &h, lambda, 0.0, 0.0, 1e-9), tree) {
            (None, TreeNode::Leaf { .. }) => {}
            (Some(o), TreeNode::Split { feature, gain, .. }) => {
                prop_assert!((gain - o.best_gain).abs() <= 1e-9, "gain {gain} oracle {}", o.best_gain);
                prop_assert!(o.optimal_features.contains(&feature));
                prop_assert_eq!(feature, o.optimal_features[0]);
            }
            (o, t) => prop_assert!(false, "oracle {:?} tree {t:?}", o.map(|o| o.best_gain)),
        }
    }

    #[test]
    fn leaf_weight_minimises_quadratic(g in -50.0f64..50.0, h in 0.0f64..50.0, lambda in 0.01f64..10.0) {
        let w = leaf_weight(g, h, lambda).unwrap();
        prop_assert!((w - grid_min_leaf(g, h, lambda)).abs() <= 1e-9);
    }

    #[test]
    fn grad_hess_matches_finite_differences(p in 0.01f64..0.99, y in 0u8..2) {
        let loss = |m: f64| {
            let q = 1.0 / (1.0 + (-m).exp());
            -(f64::from(y) * q.ln() + (1.0 - f64::from(y)) * (1.0 - q).ln())
        };
        let m = (p / (1.0 - p)).ln();
        let eps = 1e-5;
        let fd_g = (loss(m + eps) - loss(m - eps)) / (2.0 * eps);
        let e2 = 1e-3;
        let fd_h = (loss(m + e2) - 2.0 * loss(m) + loss(m - e2)) / (e2 * e2);
        let (g, h) = grad_hess(&[p], &[y]);
        prop_assert!(relative_error(g[0], fd_g) < 1e-5);
        prop_assert!(relative_error(h[0], fd_h) < 1e-4);
    }

    #[test]
    fn split_gain_gamma_is_additive(gl in -5.0f64..5.0, hl in 0.0f64..5.0, gr in -5.0f64..5.0, hr in 0.0f64..5.0, gamma in 0.0f64..10.0) {
        let a = split_gain(gl, hl, gr, hr, 1.0, 0.0);
        let b = split_gain(gl, hl, gr, hr, 1.0, gamma);
        prop_assert!((a - gamma - b).abs() < 1e-12);
    }

    #[test]
    fn gamma_never_grows_trees(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, 40, 6);
        let base = BoostConfig { n_trees: 5, max_depth: 4, min_child_weight: 0.0, ..BoostConfig::default() };
        let plain = fit(&d, &base).unwrap();
        let pruned = fit(&d, &BoostConfig { gamma: 1.0, ..base.clone() }).unwrap();
        let splits = |m: &BoostedEnsemble| m.trees.iter().map(TreeNode::num_splits).sum::<usize>();
        prop_assert!(splits(&pruned) <= splits(&plain));
    }

    #[test]
    fn trees_respect_depth_and_width(seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, 30, 5);
        let m = fit(&d, &BoostConfig { n_trees: 3, max_depth: depth, min_child_weight: 0.0, ..BoostConfig::default() }).unwrap();
        for t in &m.trees {
            prop_assert!(t.depth() <= depth);
            t.for_each_split(&mut |f, _| assert!(f < 5));
        }
    }

    #[test]
    fn dump_round_trip_predicts_identically(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, 50, 7);
        let m = fit(&d, &BoostConfig { n_trees: 8, eta: 0.17, ..BoostConfig::default() }).unwrap();
        let back = parse_model(&dump_model(&m)).unwrap();
        prop_assert_eq!(&back, &m);
        let (p1, _) = predict(&m, &d.features).unwrap();
        let (p2, _) = predict(&back, &d.features).unwrap();
        prop_assert!(p1.iter().zip(&p2).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn predict_is_pure(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_dataset(&mut r, 30, 4);
        let m = fit(&d, &BoostConfig { n_trees: 4, ..BoostConfig::default() }).unwrap();
        prop_assert_eq!(predict(&m, &d.features).unwrap(), predict(&m, &d.features).unwrap());
    }
}

#[test]
fn training_loss_never_increases() {
    for seed in 0..5 {
        let d = random_dataset(&mut rng(seed), 60, 8);
        let (_, trace) = fit_with_trace(
            &d,
            &BoostConfig {
                n_trees: 30,
                eta: 0.3,
                ..BoostConfig::default()
            },
        )
        .unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {trace:?}");
    }
}

#[test]
fn tiny_dataset_one_stump_does_not_raise_loss() {
    let d = random_dataset(&mut rng(8), 8, 3);
    let (_, trace) = fit_with_trace(
        &d,
        &BoostConfig {
            n_trees: 1,
            max_depth: 1,
            ..BoostConfig::default()
        },
    )
    .unwrap();
    assert!(trace[1] <= trace[0]);
}

fn separable() -> Dataset {
    // feature 2 is the label, the rest is noise
    let mut r = rng(4);
    let rows = 40;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..rows {
        let y = u8::from(i % 2 == 0);
        data.extend([r.gen_range(0..2u8), r.gen_range(0..2u8), y, r.gen_range(0..2u8)]);
        labels.push(y);
    }
    Dataset::new(
        BinaryMatrix::new(rows, 4, data).unwrap(),
        labels,
        vec![1; rows],
        ["a", "b", "sig", "c"].map(String::from).to_vec(),
    )
    .unwrap()
}

#[test]
fn separating_feature_reaches_full_training_accuracy() {
    let d = separable();
    let m = fit(
        &d,
        &BoostConfig {
            n_trees: 10,
            max_depth: 1,
            ..BoostConfig::default()
        },
    )
    .unwrap();
    assert!(m.trees.iter().all(|t| matches!(t, TreeNode::Split { feature: 2, .. })));
    let (_, labels) = predict(&m, &d.features).unwrap();
    assert_eq!(labels, d.labels);
    let imp = feature_importance(&m);
    assert_eq!(imp.len(), 1);
    assert_eq!(imp[0].0, "sig");
}

#[test]
fn prior_model_and_tie_rule() {
    let d = separable();
    let m = fit(
        &d,
        &BoostConfig {
            n_trees: 0,
            ..BoostConfig::default()
        },
    )
    .unwrap();
    assert_eq!(m.base_score, 0.0);
    let (p, labels) = predict(&m, &d.features).unwrap();
    assert!(p.iter().all(|&v| v == 0.5));
    assert!(labels.iter().all(|&l| l == 0));
    assert!(feature_importance(&m).is_empty());

    let mut skewed = d.clone();
    skewed.labels[1] = 1; // 21 positives of 40
    let m = fit(
        &skewed,
        &BoostConfig {
            n_trees: 0,
            ..BoostConfig::default()
        },
    )
    .unwrap();
    let (p, _) = predict(&m, &skewed.features).unwrap();
    assert!((p[0] - 21.0 / 40.0).abs() < 1e-15);
}

#[test]
fn importance_adds_gains_across_trees() {
    let leaf = |w| Box::new(TreeNode::Leaf { weight: w });
    let split = |gain| TreeNode::Split {
        feature: 1,
        gain,
        left: leaf(0.1),
        right: leaf(-0.1),
    };
    let m = BoostedEnsemble {
        trees: vec![split(2.0), split(3.0)],
        base_score: 0.0,
        config: BoostConfig {
            n_trees: 2,
            ..BoostConfig::default()
        },
        feature_names: vec!["a".into(), "b".into(), "c".into()],
    };
    assert_eq!(feature_importance(&m), vec![("b".to_string(), 5.0)]);
}

#[test]
fn duplicate_rows_get_identical_probabilities() {
    let mut d = separable();
    let row = d.features.row(3).to_vec();
    let x = BinaryMatrix::new(2, 4, [row.clone(), row].concat()).unwrap();
    d.labels[0] = 0;
    let m = fit(
        &d,
        &BoostConfig {
            n_trees: 5,
            ..BoostConfig::default()
        },
    )
    .unwrap();
    let (p, _) = predict(&m, &x).unwrap();
    assert_eq!(p[0].to_bits(), p[1].to_bits());
}
