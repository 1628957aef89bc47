use serde::{Deserialize, Serialize};

use super::{MetricsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// A ratio together with whether its denominator was zero (value then 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub degenerate: bool,
}

impl Rate {
    fn of(num: u64, den: u64) -> Self {
        if den == 0 {
            Self {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Self {
                value: num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

pub(crate) fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        Rate::of(self.tp + self.tn, self.total()).value
    }

    pub fn precision(&self) -> Rate {
        Rate::of(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Rate {
        Rate::of(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> Rate {
        let (p, r) = (self.precision().value, self.recall().value);
        Rate {
            value: harmonic_mean(p, r),
            degenerate: p + r == 0.0,
        }
    }

    /// The matrix obtained by swapping which class counts as positive.
    pub fn flipped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

pub fn confusion(predicted: &[u8], actual: &[u8]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fp += 1,
            (0, 1) => cm.fn_ += 1,
            (bad, 0 | 1) | (_, bad) => return Err(MetricsError::InvalidLabel(bad)),
        }
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(confusion(&[1, 0], &[1, 0]).unwrap(), ConfusionMatrix::new(1, 1, 0, 0));
        assert_eq!(confusion(&[1, 1], &[0, 0]).unwrap().fp, 2);
        assert!(confusion(&[1], &[1, 0]).is_err());
        assert!(confusion(&[], &[]).is_err());
        assert!(confusion(&[2], &[1]).is_err());
    }

    #[test]
    fn reported_cells() {
        let cm = ConfusionMatrix::new(137_340, 129_753, 79_038, 71_450);
        assert_eq!(cm.total(), 417_581);
        assert_eq!(cm.accuracy(), 267_093.0 / 417_581.0);
        assert!((cm.accuracy() - 0.639620).abs() < 5e-7);
        assert!((cm.precision().value - 0.63472).abs() < 5e-6);
        assert!((cm.recall().value - 0.65779).abs() < 5e-6);
    }

    #[test]
    fn perfect_classifier() {
        let cm = ConfusionMatrix::new(1, 1, 0, 0);
        assert_eq!(cm.accuracy(), 1.0);
        assert_eq!(cm.precision().value, 1.0);
        assert_eq!(cm.recall().value, 1.0);
        assert_eq!(cm.f1().value, 1.0);
    }

    #[test]
    fn degenerate_denominators() {
        let cm = ConfusionMatrix::new(0, 5, 0, 0);
        assert_eq!(
            cm.precision(),
            Rate {
                value: 0.0,
                degenerate: true
            }
        );
        assert_eq!(
            cm.recall(),
            Rate {
                value: 0.0,
                degenerate: true
            }
        );
        assert_eq!(cm.f1().value, 0.0);
        assert!(!ConfusionMatrix::new(1, 0, 1, 0).precision().degenerate);
    }

    proptest! {
        #[test]
        fn label_flip_duality(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..60)) {
            let (p, a): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let cm = confusion(&p, &a).unwrap();
            let flip = |v: &[u8]| v.iter().map(|x| 1 - x).collect::<Vec<_>>();
            let fcm = confusion(&flip(&p), &flip(&a)).unwrap();
            prop_assert_eq!(fcm, cm.flipped());
            prop_assert_eq!(fcm.accuracy(), cm.accuracy());
        }

        #[test]
        fn f1_zero_without_true_positives(tn in 0u64..50, fp in 0u64..50, fn_ in 0u64..50) {
            prop_assert_eq!(ConfusionMatrix::new(0, tn, fp, fn_).f1().value, 0.0);
        }

        #[test]
        fn accuracy_permutation_invariant(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..60), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let acc = |v: &[(u8, u8)]| {
                let (p, a): (Vec<u8>, Vec<u8>) = v.iter().copied().unzip();
                confusion(&p, &a).unwrap().accuracy()
            };
            prop_assert_eq!(acc(&pairs), acc(&shuffled));
        }
    }
}
