use rand::seq::SliceRandom;

use super::dataset::Dataset;
use super::{DataError, Result};
use crate::seed::{rng_for, stream};

#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
    pub split_seed: u64,
    /// Source row indices of `train`, ascending.
    pub train_rows: Vec<usize>,
    /// Source row indices of `test`, ascending.
    pub test_rows: Vec<usize>,
}

/// Per-class test counts: `round(count * test_fraction)`.
pub(crate) fn stratified_test_counts(class_counts: [usize; 2], test_fraction: f64) -> [usize; 2] {
    class_counts.map(|n| ((n as f64) * test_fraction).round() as usize)
}

/// Shuffles each class independently under `seed` and moves
/// `round(class_count * test_fraction)` rows of it to the test side.
pub fn stratified_split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut train_rows = Vec::with_capacity(data.len());
    let mut test_rows = Vec::new();
    let targets = stratified_test_counts(data.class_counts(), test_fraction);
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(DataError::ClassTooSmall {
                class,
                count: idx.len(),
            });
        }
        let mut rng = rng_for(seed, &[stream::SPLIT, u64::from(class)]);
        idx.shuffle(&mut rng);
        let n_test = targets[class as usize];
        test_rows.extend_from_slice(&idx[..n_test]);
        train_rows.extend_from_slice(&idx[n_test..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(SplitDataset {
        train: data.subset(&train_rows),
        test: data.subset(&test_rows),
        split_seed: seed,
        train_rows,
        test_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::BinaryMatrix;

    fn labelled(labels: Vec<u8>) -> Dataset {
        let n = labels.len();
        let feats = (0..n).map(|i| (i % 2) as u8).collect();
        Dataset::new(
            BinaryMatrix::new(n, 1, feats).unwrap(),
            labels,
            (0..n as i64).collect(),
            vec!["f".into()],
        )
        .unwrap()
    }

    #[test]
    fn balanced_hundred() {
        let d = labelled((0..100).map(|i| (i % 2) as u8).collect());
        let s = stratified_split(&d, 0.2, 42).unwrap();
        assert_eq!(s.test.class_counts(), [10, 10]);
        assert_eq!(s.train.class_counts(), [40, 40]);
    }

    #[test]
    fn deterministic_under_seed() {
        let d = labelled((0..57).map(|i| u8::from(i % 3 == 0)).collect());
        let a = stratified_split(&d, 0.3, 9).unwrap();
        let b = stratified_split(&d, 0.3, 9).unwrap();
        assert_eq!(a.test_rows, b.test_rows);
        let c = stratified_split(&d, 0.3, 10).unwrap();
        assert_ne!(a.test_rows, c.test_rows);
    }

    #[test]
    fn errors() {
        let d = labelled(vec![0, 0, 0, 1]);
        assert!(matches!(
            stratified_split(&d, 0.2, 1),
            Err(DataError::ClassTooSmall { class: 1, count: 1 })
        ));
        let d = labelled(vec![0, 0, 1, 1]);
        assert!(stratified_split(&d, 0.0, 1).is_err());
        assert!(stratified_split(&d, 1.0, 1).is_err());
    }

    #[test]
    fn full_scale_test_size() {
        // 2,087,904 rows whose per-class test counts reproduce the reported
        // confusion-matrix margins (208,791 negatives, 208,790 positives).
        let counts = [1_043_955, 1_043_949];
        assert_eq!(counts[0] + counts[1], 2_087_904);
        let t = stratified_test_counts(counts, 0.2);
        assert_eq!(t, [208_791, 208_790]);
        assert_eq!(t[0] + t[1], 417_581);
    }
}
