//! Softmax regression on the training features, used as the base
//! classifier that ranks classes for top-N selection.

use crate::config::{entry, parse_value, Settings};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::{matmul_nt, matmul_tn, Matrix, RngStream, Vector};
use crate::scalar::Scalar;
use crate::training::{AdamConfig, AdamState};

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub steps: usize,
    pub learning_rate: f64,
    /// Rows per minibatch; the whole set when it is smaller.
    pub batch_size: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            steps: 500,
            learning_rate: 0.01,
            batch_size: 128,
        }
    }
}

impl Settings for ProbeConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "probe-steps" => self.steps = parse_value(key, value)?,
            "probe-lr" => self.learning_rate = parse_value(key, value)?,
            "probe-batch-size" => self.batch_size = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            entry("probe-steps", self.steps),
            entry("probe-lr", self.learning_rate),
            entry("probe-batch-size", self.batch_size),
        ]
    }
}

/// `softmax(W q + b)` over the `K` known classes.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProbe<T> {
    /// `K x d`.
    pub w: Matrix<T>,
    pub b: Vec<T>,
}

fn softmax_rows<T: Scalar>(logits: &mut Matrix<T>) {
    let cols = logits.cols();
    for row in logits.as_mut_slice().chunks_exact_mut(cols) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

impl<T: Scalar> LinearProbe<T> {
    pub fn num_classes(&self) -> usize {
        self.w.rows()
    }

    /// Class probabilities for every row of `x` (`n x K`).
    pub fn class_scores_matrix(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut logits = matmul_nt(x, &self.w)?;
        logits.add_row_bias(&self.b);
        softmax_rows(&mut logits);
        Ok(logits)
    }

    pub fn class_scores(&self, q: &[T]) -> Result<Vector<T>> {
        let m = self.class_scores_matrix(&Matrix::new(1, q.len(), q.to_vec())?)?;
        Ok(Vector::from_vec(m.into_vec()))
    }

    /// Most probable class (1-based), ties to the smaller class.
    pub fn predict(&self, q: &[T]) -> Result<usize> {
        let s = self.class_scores(q)?;
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = i;
            }
        }
        Ok(best + 1)
    }

    /// Fraction of labelled (known) rows classified correctly.
    pub fn accuracy(&self, ds: &LabeledDataset<T>) -> Result<f64> {
        let scores = self.class_scores_matrix(ds.features())?;
        let (mut hit, mut total) = (0usize, 0usize);
        for (i, row) in scores.iter_rows().enumerate() {
            if ds.label(i) == 0 {
                continue;
            }
            let mut best = 0;
            for (c, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = c;
                }
            }
            hit += (best + 1 == ds.label(i)) as usize;
            total += 1;
        }
        if total == 0 {
            return Err(Error::contract("accuracy needs labelled rows"));
        }
        Ok(hit as f64 / total as f64)
    }
}

/// Fits the probe by minibatch Adam on mean softmax cross-entropy, starting
/// from zero weights. Deterministic given `rng`.
pub fn train_linear_probe<T: Scalar>(
    ds: &LabeledDataset<T>,
    cfg: &ProbeConfig,
    rng: &mut RngStream,
) -> Result<LinearProbe<T>> {
    ds.validate_training()?;
    if cfg.steps == 0 || cfg.batch_size == 0 {
        return Err(Error::contract(
            "probe steps and batch size must be positive",
        ));
    }
    let adam = AdamConfig {
        learning_rate: cfg.learning_rate,
        ..AdamConfig::default()
    };
    adam.validate()?;
    let k = ds.num_known_classes();
    let d = ds.dim();
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.label(i) != 0).collect();
    let batch = cfg.batch_size.min(rows.len());
    let mut probe = LinearProbe {
        w: Matrix::zeros(k, d),
        b: vec![T::zero(); k],
    };
    let mut state = AdamState::<T>::new(&[k * d, k]);
    let mut order = rows.clone();
    let mut cursor = order.len();
    let inv = T::one() / T::of(batch as f64);
    for _ in 0..cfg.steps {
        let mut idx = Vec::with_capacity(batch);
        while idx.len() < batch {
            if cursor == order.len() {
                rng.shuffle(&mut order);
                cursor = 0;
            }
            idx.push(order[cursor]);
            cursor += 1;
        }
        let x = ds.features().select_rows(&idx);
        let mut delta = probe.class_scores_matrix(&x)?;
        for (r, &i) in idx.iter().enumerate() {
            let row = delta.row_mut(r);
            row[ds.label(i) - 1] -= T::one();
            row.iter_mut().for_each(|v| *v *= inv);
        }
        let gw = matmul_tn(&delta, &x)?;
        let gb = delta.column_sums();
        state.step(
            &mut [probe.w.as_mut_slice(), &mut probe.b],
            &[gw.as_slice(), &gb],
            &adam,
        )?;
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> LabeledDataset<f64> {
        let mut rng = RngStream::new(4);
        let centers = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..30 {
                data.extend(center.iter().map(|m| m + 0.1 * rng.normal()));
                labels.push(c + 1);
            }
        }
        LabeledDataset::new(Matrix::new(90, 3, data).unwrap(), labels, 3).unwrap()
    }

    #[test]
    fn separable_blobs_are_learned() {
        let ds = blobs();
        let p = train_linear_probe(&ds, &ProbeConfig::default(), &mut RngStream::new(1)).unwrap();
        assert!(p.accuracy(&ds).unwrap() >= 0.95);
        assert_eq!(p.predict(&[0.0, 0.9, 0.1]).unwrap(), 2);
    }

    #[test]
    fn scores_are_a_distribution_and_deterministic() {
        let ds = blobs();
        let cfg = ProbeConfig {
            steps: 50,
            ..Default::default()
        };
        let a = train_linear_probe(&ds, &cfg, &mut RngStream::new(9)).unwrap();
        let b = train_linear_probe(&ds, &cfg, &mut RngStream::new(9)).unwrap();
        assert_eq!(a, b);
        let s = a.class_scores(&[3.0, -20.0, 0.5]).unwrap();
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn settings() {
        let mut cfg = ProbeConfig::default();
        assert!(cfg.set("probe-steps", "10").unwrap());
        assert!(!cfg.set("steps", "10").unwrap());
        assert_eq!(cfg.steps, 10);
    }
}
