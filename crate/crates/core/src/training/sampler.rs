//! Random mixing coefficients and source pairs.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scalar::Scalar;

/// Uniform draw from the open interval `(0, 1)`, representable in `T`.
pub fn sample_alpha<T: Scalar>(rng: &mut RngStream) -> T {
    loop {
        let a = T::of(rng.open01());
        if a > T::zero() && a < T::one() {
            return a;
        }
    }
}

/// Two training rows and their classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourcePair {
    pub first: usize,
    pub first_class: usize,
    pub second: usize,
    pub second_class: usize,
}

impl SourcePair {
    pub fn is_matched(&self) -> bool {
        self.first_class == self.second_class
    }
}

/// Draws matched and non-matched source pairs from a training set.
#[derive(Clone, Debug)]
pub struct PairSampler {
    /// `(class, rows)` for every class present.
    groups: Vec<(usize, Vec<usize>)>,
    matched_pair_prob: f64,
}

impl PairSampler {
    pub fn new<T: Scalar>(ds: &LabeledDataset<T>, matched_pair_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&matched_pair_prob) {
            return Err(Error::contract(format!(
                "matched pair probability {matched_pair_prob} is not in [0, 1]"
            )));
        }
        ds.validate_training()?;
        let groups: Vec<(usize, Vec<usize>)> = ds
            .rows_by_label()
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|(_, rows)| !rows.is_empty())
            .collect();
        if matched_pair_prob < 1.0 && groups.len() < 2 {
            return Err(Error::contract(
                "non-matched pairs need at least two classes in the training data",
            ));
        }
        Ok(PairSampler {
            groups,
            matched_pair_prob,
        })
    }

    /// With probability `matched_pair_prob`: two distinct rows of one
    /// uniformly chosen class. Otherwise: one row from each of two distinct
    /// uniformly chosen classes.
    pub fn sample(&self, rng: &mut RngStream) -> SourcePair {
        if rng.bernoulli(self.matched_pair_prob) {
            let (class, rows) = &self.groups[rng.below(self.groups.len())];
            let a = rng.below(rows.len());
            let mut b = rng.below(rows.len() - 1);
            if b >= a {
                b += 1;
            }
            SourcePair {
                first: rows[a],
                first_class: *class,
                second: rows[b],
                second_class: *class,
            }
        } else {
            let n = self.groups.len();
            let gi = rng.below(n);
            let mut gj = rng.below(n - 1);
            if gj >= gi {
                gj += 1;
            }
            let (ci, ri) = &self.groups[gi];
            let (cj, rj) = &self.groups[gj];
            SourcePair {
                first: ri[rng.below(ri.len())],
                first_class: *ci,
                second: rj[rng.below(rj.len())],
                second_class: *cj,
            }
        }
    }
}

/// One-shot form of [`PairSampler::sample`].
pub fn sample_pair<T: Scalar>(
    ds: &LabeledDataset<T>,
    matched_pair_prob: f64,
    rng: &mut RngStream,
) -> Result<SourcePair> {
    Ok(PairSampler::new(ds, matched_pair_prob)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn dataset() -> LabeledDataset<f64> {
        let labels = vec![1, 1, 2, 2, 2, 3, 3];
        let data = (0..labels.len()).flat_map(|i| [1.0, i as f64]).collect();
        LabeledDataset::new(Matrix::new(labels.len(), 2, data).unwrap(), labels, 3).unwrap()
    }

    #[test]
    fn alpha_support_mean_and_determinism() {
        let mut rng = RngStream::new(21);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_alpha(&mut rng)).collect();
        assert!(draws.iter().all(|a| *a > 0.0 && *a < 1.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
        let mut again = RngStream::new(21);
        assert!(draws
            .iter()
            .take(100)
            .all(|a| *a == sample_alpha::<f64>(&mut again)));
        let mut rng32 = RngStream::new(4);
        assert!((0..10_000).all(|_| {
            let a: f32 = sample_alpha(&mut rng32);
            a > 0.0 && a < 1.0
        }));
    }

    #[test]
    fn forced_branches() {
        let ds = dataset();
        let mut rng = RngStream::new(1);
        let always = PairSampler::new(&ds, 1.0).unwrap();
        let never = PairSampler::new(&ds, 0.0).unwrap();
        for _ in 0..2000 {
            let p = always.sample(&mut rng);
            assert!(p.is_matched() && p.first != p.second);
            assert_eq!(ds.label(p.first), p.first_class);
            let q = never.sample(&mut rng);
            assert!(!q.is_matched());
            assert_eq!(ds.label(q.first), q.first_class);
            assert_eq!(ds.label(q.second), q.second_class);
        }
    }

    #[test]
    fn matched_fraction_concentrates() {
        let ds = dataset();
        let s = PairSampler::new(&ds, 0.2).unwrap();
        let mut rng = RngStream::new(99);
        let matched = (0..10_000)
            .filter(|_| s.sample(&mut rng).is_matched())
            .count();
        assert!((matched as f64 / 10_000.0 - 0.2).abs() < 0.03);
    }

    #[test]
    fn rejects_invalid_training_data() {
        let labels = vec![1, 1, 0];
        let m = Matrix::new(3, 1, vec![1.0; 3]).unwrap();
        let ds = LabeledDataset::new(m, labels, 1).unwrap();
        assert!(PairSampler::new(&ds, 0.5).is_err());
        let single =
            LabeledDataset::new(Matrix::new(2, 1, vec![1.0; 2]).unwrap(), vec![1, 1], 2).unwrap();
        assert!(
            PairSampler::new(&single, 0.5).is_err(),
            "one class cannot form non-matched pairs"
        );
        assert!(PairSampler::new(&single, 1.0).is_ok());
        assert!(PairSampler::new(&dataset(), 1.5).is_err());
    }
}
