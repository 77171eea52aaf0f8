use crate::error::{Error, Result};
use crate::numerics::{l2_normalize, Matrix};
use crate::scalar::Scalar;

/// Label reserved for samples of a class not seen during training.
pub const NOVEL_LABEL: usize = 0;

/// Feature rows with integer labels in `0..=K`.
///
/// Rows are unit-normalized on construction. Label 0 marks a novel sample;
/// labels `1..=K` are the known classes.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset<T> {
    features: Matrix<T>,
    labels: Vec<usize>,
    num_known_classes: usize,
}

impl<T: Scalar> LabeledDataset<T> {
    /// Builds a dataset, L2-normalizing every feature row.
    pub fn new(features: Matrix<T>, labels: Vec<usize>, num_known_classes: usize) -> Result<Self> {
        let mut features = features;
        for r in 0..features.rows() {
            let unit = l2_normalize(features.row(r))
                .map_err(|_| Error::Degenerate(format!("feature row {r} has zero norm")))?;
            features.row_mut(r).copy_from_slice(&unit);
        }
        Self::from_normalized(features, labels, num_known_classes)
    }

    /// Builds a dataset from rows that are already unit-norm.
    pub(crate) fn from_normalized(
        features: Matrix<T>,
        labels: Vec<usize>,
        num_known_classes: usize,
    ) -> Result<Self> {
        if num_known_classes == 0 {
            return Err(Error::contract("number of known classes must be positive"));
        }
        if features.rows() != labels.len() {
            return Err(Error::shapes(
                "LabeledDataset",
                format!("{} feature rows", features.rows()),
                format!("{} labels", labels.len()),
            ));
        }
        if let Some((i, l)) = labels
            .iter()
            .enumerate()
            .find(|(_, l)| **l > num_known_classes)
        {
            return Err(Error::contract(format!(
                "label {l} at row {i} exceeds the number of known classes {num_known_classes}"
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            num_known_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_known_classes(&self) -> usize {
        self.num_known_classes
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Row indices carrying `label`, in dataset order.
    pub fn class_rows(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row indices grouped by label; entry `c` holds the rows of label `c`.
    pub fn rows_by_label(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_known_classes + 1];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }

    /// Known classes that have at least one row, ascending.
    pub fn known_classes_present(&self) -> Vec<usize> {
        self.rows_by_label()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, rows)| !rows.is_empty())
            .map(|(c, _)| c)
            .collect()
    }

    /// Checks the invariants a training set must satisfy: no novel rows and
    /// at least two samples for every class that occurs.
    pub fn validate_training(&self) -> Result<()> {
        if let Some(i) = self.labels.iter().position(|l| *l == NOVEL_LABEL) {
            return Err(Error::contract(format!(
                "training data contains a novel (label 0) sample at row {i}"
            )));
        }
        for (c, rows) in self.rows_by_label().iter().enumerate().skip(1) {
            if rows.len() == 1 {
                return Err(Error::contract(format!(
                    "class {c} has a single training sample; at least 2 are required"
                )));
            }
        }
        if self.known_classes_present().is_empty() {
            return Err(Error::contract("training data is empty"));
        }
        Ok(())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        LabeledDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_known_classes: self.num_known_classes,
        }
    }

    /// Appends `other` below `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() || self.num_known_classes != other.num_known_classes {
            return Err(Error::shapes(
                "LabeledDataset::concat",
                format!("dim {} K {}", self.dim(), self.num_known_classes),
                format!("dim {} K {}", other.dim(), other.num_known_classes),
            ));
        }
        let mut data = self.features.as_slice().to_vec();
        data.extend_from_slice(other.features.as_slice());
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(LabeledDataset {
            features: Matrix::from_parts(labels.len(), self.dim(), data),
            labels,
            num_known_classes: self.num_known_classes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_normalizes_rows() {
        let m = Matrix::new(2, 2, vec![3.0, 4.0, 0.0, 2.0]).unwrap();
        let ds = LabeledDataset::new(m, vec![1, 2], 2).unwrap();
        assert_eq!(ds.row(0), &[0.6, 0.8]);
        assert_eq!(ds.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_out_of_range_labels_and_zero_rows() {
        let m = Matrix::new(1, 2, vec![1.0, 0.0]).unwrap();
        assert!(LabeledDataset::new(m, vec![3], 2).is_err());
        let z = Matrix::new(1, 2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            LabeledDataset::new(z, vec![1], 2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn training_validation() {
        let m = Matrix::new(3, 1, vec![1.0, 1.0, 1.0]).unwrap();
        let ok = LabeledDataset::new(m.clone(), vec![1, 1, 2], 2).unwrap();
        assert!(ok.validate_training().is_err(), "class 2 has one sample");
        let novel = LabeledDataset::new(m.clone(), vec![1, 1, 0], 2).unwrap();
        assert!(novel.validate_training().is_err());
        let good = LabeledDataset::new(m, vec![2, 2, 2], 2).unwrap();
        assert!(good.validate_training().is_ok());
    }
}
