//! Desk-scale stand-in for the assessment microdata.
//!
//! Each feature column has a shared categorical prior; every school tilts
//! that prior by `heterogeneity * skew` so clients range from IID (0) to
//! strongly non-IID (1). Proficiency is a logistic function of a hidden
//! additive model over the categories plus Gaussian noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::pipeline::{DEFAULT_FEATURE_COLUMNS, DEFAULT_SCHOOL_COLUMN, DEFAULT_TARGET_COLUMN};
use super::table::RawTable;
use super::{DataError, Result};
use crate::seed::{rng_for, stream};

/// Category counts of the default 11 columns; they total 54.
pub const DEFAULT_CATEGORY_COUNTS: [usize; 11] = [2, 6, 8, 8, 8, 3, 3, 4, 4, 4, 4];

const PRIOR_SCALE: f64 = 0.5;
const SKEW_SCALE: f64 = 3.0;
const FIRST_SCHOOL_ID: i64 = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub schools: usize,
    pub min_rows: usize,
    pub max_rows: usize,
    pub category_counts: Vec<usize>,
    pub heterogeneity: f64,
    /// Standard deviation of the latent noise; 0 makes the label a
    /// deterministic function of the features.
    pub noise: f64,
    /// Probability that a feature cell is written as a missing marker.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            schools: 50,
            min_rows: 36,
            max_rows: 44,
            category_counts: DEFAULT_CATEGORY_COUNTS.to_vec(),
            heterogeneity: 0.5,
            noise: 1.0,
            missing_rate: 0.0,
            seed: 42,
        }
    }
}

/// Column name used for the `i`-th synthetic feature.
pub fn synthetic_column_name(i: usize) -> String {
    DEFAULT_FEATURE_COLUMNS
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("TX_RESP_X{:02}", i + 1))
}

fn category_code(k: usize) -> String {
    if k < 26 {
        char::from(b'A' + k as u8).to_string()
    } else {
        format!("C{k:03}")
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<RawTable> {
    if spec.category_counts.is_empty() {
        return Err(DataError::InvalidArgument("empty feature_spec".into()));
    }
    if spec.schools == 0 {
        return Err(DataError::InvalidArgument("schools must be at least 1".into()));
    }
    if spec.min_rows == 0 || spec.min_rows > spec.max_rows {
        return Err(DataError::InvalidArgument(format!(
            "invalid rows_per_school range {}..={}",
            spec.min_rows, spec.max_rows
        )));
    }
    if spec.category_counts.contains(&0) {
        return Err(DataError::InvalidArgument("every column needs a category".into()));
    }
    if !(0.0..=1.0).contains(&spec.heterogeneity) || !(0.0..=1.0).contains(&spec.missing_rate) {
        return Err(DataError::InvalidArgument(
            "heterogeneity and missing_rate must lie in [0, 1]".into(),
        ));
    }
    if spec.noise.is_nan() || spec.noise < 0.0 {
        return Err(DataError::InvalidArgument("noise must be non-negative".into()));
    }

    let mut rng = rng_for(spec.seed, &[stream::SYNTHETIC]);
    let prior: Vec<Vec<f64>> = spec
        .category_counts
        .iter()
        .map(|&n| (0..n).map(|_| PRIOR_SCALE * normal(&mut rng)).collect())
        .collect();
    let effects: Vec<Vec<f64>> = spec
        .category_counts
        .iter()
        .map(|&n| (0..n).map(|_| normal(&mut rng)).collect())
        .collect();

    let mut columns = vec![DEFAULT_SCHOOL_COLUMN.to_string(), DEFAULT_TARGET_COLUMN.to_string()];
    columns.extend((0..spec.category_counts.len()).map(synthetic_column_name));
    let mut rows = Vec::new();

    for s in 0..spec.schools {
        let school_id = FIRST_SCHOOL_ID + s as i64;
        let dists: Vec<Vec<f64>> = prior
            .iter()
            .map(|base| {
                let tilted: Vec<f64> = base
                    .iter()
                    .map(|b| b + spec.heterogeneity * SKEW_SCALE * normal(&mut rng))
                    .collect();
                softmax(&tilted)
            })
            .collect();
        let n_rows = rng.gen_range(spec.min_rows..=spec.max_rows);
        for _ in 0..n_rows {
            let mut row = Vec::with_capacity(columns.len());
            row.push(Some(school_id.to_string()));
            row.push(None);
            let mut latent = 0.0;
            for (f, probs) in dists.iter().enumerate() {
                let k = sample_categorical(probs, &mut rng);
                latent += effects[f][k];
                let missing: f64 = rng.gen();
                if missing < spec.missing_rate {
                    row.push(Some(if rng.gen::<bool>() { "." } else { "*" }.to_string()));
                } else {
                    row.push(Some(category_code(k)));
                }
            }
            latent += spec.noise * normal(&mut rng);
            let score = 150.0 + 200.0 / (1.0 + (-latent / 2.0).exp());
            row[1] = Some(format!("{score:.4}"));
            rows.push(row);
        }
    }
    RawTable::new(columns, rows)
}
