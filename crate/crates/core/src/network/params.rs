use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::scalar::Scalar;

/// Number of inputs per sample: the two sources and their mixture.
pub const BRANCHES: usize = 3;

/// Layer widths of the segregation network.
///
/// `input_dim -> hidden1` is applied to each of the three inputs with shared
/// weights; the three outputs are concatenated (`3 * hidden1`), then
/// `-> hidden2 -> num_classes`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub num_classes: usize,
}

impl Architecture {
    pub const DEFAULT_HIDDEN1: usize = 512;
    pub const DEFAULT_HIDDEN2: usize = 256;

    /// Default hidden widths (512 per branch, 1536 concatenated, 256).
    pub fn new(input_dim: usize, num_classes: usize) -> Self {
        Architecture {
            input_dim,
            hidden1: Self::DEFAULT_HIDDEN1,
            hidden2: Self::DEFAULT_HIDDEN2,
            num_classes,
        }
    }

    pub fn concat_width(&self) -> usize {
        BRANCHES * self.hidden1
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden1 == 0 || self.hidden2 == 0 || self.num_classes == 0 {
            return Err(Error::contract(format!(
                "architecture has a zero-width layer: {self:?}"
            )));
        }
        Ok(())
    }

    /// Total number of trainable scalars.
    pub fn num_params(&self) -> usize {
        self.hidden1 * (self.input_dim + 1)
            + self.hidden2 * (self.concat_width() + 1)
            + self.num_classes * (self.hidden2 + 1)
    }
}

/// Names of the six parameter tensors, in storage order.
pub const TENSOR_NAMES: [&str; 6] = ["W1", "b1", "W2", "b2", "W3", "b3"];

/// Weights and biases of the three fully connected layers.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    pub w3: Matrix<T>,
    pub b3: Vec<T>,
    pub dropout_p: f64,
}

/// Gradients with the same layout as [`NetworkParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    pub w3: Matrix<T>,
    pub b3: Vec<T>,
}

fn glorot<T: Scalar>(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix<T> {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| T::of(rng.uniform(-s, s).expect("s > 0")))
        .collect();
    Matrix::from_parts(rows, cols, data)
}

pub(crate) fn validate_dropout(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::contract(format!(
            "dropout probability {p} is not in [0, 1)"
        )));
    }
    Ok(())
}

impl<T: Scalar> NetworkParams<T> {
    /// Glorot-uniform weights (`|w| <= sqrt(6 / (fan_in + fan_out))`),
    /// zero biases. Draws W1, W2, W3 in row-major order from `rng`.
    pub fn init(arch: Architecture, dropout_p: f64, rng: &mut RngStream) -> Result<Self> {
        arch.validate()?;
        validate_dropout(dropout_p)?;
        let w1 = glorot(arch.hidden1, arch.input_dim, rng);
        let w2 = glorot(arch.hidden2, arch.concat_width(), rng);
        let w3 = glorot(arch.num_classes, arch.hidden2, rng);
        Ok(NetworkParams {
            w1,
            b1: vec![T::zero(); arch.hidden1],
            w2,
            b2: vec![T::zero(); arch.hidden2],
            w3,
            b3: vec![T::zero(); arch.num_classes],
            dropout_p,
        })
    }

    /// All-zero parameters of the given shape.
    pub fn zeros(arch: Architecture, dropout_p: f64) -> Result<Self> {
        arch.validate()?;
        validate_dropout(dropout_p)?;
        Ok(NetworkParams {
            w1: Matrix::zeros(arch.hidden1, arch.input_dim),
            b1: vec![T::zero(); arch.hidden1],
            w2: Matrix::zeros(arch.hidden2, arch.concat_width()),
            b2: vec![T::zero(); arch.hidden2],
            w3: Matrix::zeros(arch.num_classes, arch.hidden2),
            b3: vec![T::zero(); arch.num_classes],
            dropout_p,
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.w1.cols(),
            hidden1: self.w1.rows(),
            hidden2: self.w2.rows(),
            num_classes: self.w3.rows(),
        }
    }

    /// Checks that the tensors fit together.
    pub fn validate(&self) -> Result<()> {
        let a = self.architecture();
        a.validate()?;
        validate_dropout(self.dropout_p)?;
        let ok = self.b1.len() == a.hidden1
            && self.w2.cols() == a.concat_width()
            && self.b2.len() == a.hidden2
            && self.w3.cols() == a.hidden2
            && self.b3.len() == a.num_classes;
        if !ok {
            return Err(Error::shapes(
                "NetworkParams",
                format!("{a:?}"),
                format!(
                    "b1 {} W2 {:?} b2 {} W3 {:?} b3 {}",
                    self.b1.len(),
                    self.w2.shape(),
                    self.b2.len(),
                    self.w3.shape(),
                    self.b3.len()
                ),
            ));
        }
        if !self
            .tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
        {
            return Err(Error::Degenerate(
                "network parameters contain non-finite values".into(),
            ));
        }
        Ok(())
    }

    pub fn tensors(&self) -> [&[T]; 6] {
        [
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
            self.w3.as_slice(),
            &self.b3,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [T]; 6] {
        [
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
            self.w3.as_mut_slice(),
            &mut self.b3,
        ]
    }
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(p: &NetworkParams<T>) -> Self {
        Gradients {
            w1: Matrix::zeros(p.w1.rows(), p.w1.cols()),
            b1: vec![T::zero(); p.b1.len()],
            w2: Matrix::zeros(p.w2.rows(), p.w2.cols()),
            b2: vec![T::zero(); p.b2.len()],
            w3: Matrix::zeros(p.w3.rows(), p.w3.cols()),
            b3: vec![T::zero(); p.b3.len()],
        }
    }

    pub fn tensors(&self) -> [&[T]; 6] {
        [
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
            self.w3.as_slice(),
            &self.b3,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [T]; 6] {
        [
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
            self.w3.as_mut_slice(),
            &mut self.b3,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn scale(&mut self, factor: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_with_zero_biases_and_bounded_weights() {
        let arch = Architecture {
            input_dim: 10,
            hidden1: 16,
            hidden2: 8,
            num_classes: 4,
        };
        let a = NetworkParams::<f64>::init(arch, 0.5, &mut RngStream::new(3)).unwrap();
        let b = NetworkParams::<f64>::init(arch, 0.5, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.b1.iter().chain(&a.b2).chain(&a.b3).all(|v| *v == 0.0));
        let bound1 = (6.0 / (10.0 + 16.0f64)).sqrt();
        assert!(a.w1.as_slice().iter().all(|w| w.abs() <= bound1));
        let bound2 = (6.0 / (48.0 + 8.0f64)).sqrt();
        assert!(a.w2.as_slice().iter().all(|w| w.abs() <= bound2));
        assert_eq!(a.w2.cols(), 3 * 16);
        assert!(a.validate().is_ok());
    }

    #[test]
    fn default_widths() {
        let arch = Architecture::new(64, 8);
        assert_eq!(
            (arch.hidden1, arch.concat_width(), arch.hidden2),
            (512, 1536, 256)
        );
    }

    #[test]
    fn init_rejects_bad_arguments() {
        let mut rng = RngStream::new(0);
        assert!(NetworkParams::<f64>::init(Architecture::new(0, 3), 0.1, &mut rng).is_err());
        assert!(NetworkParams::<f64>::init(Architecture::new(4, 3), 1.0, &mut rng).is_err());
        assert!(NetworkParams::<f64>::init(Architecture::new(4, 3), -0.1, &mut rng).is_err());
    }
}
