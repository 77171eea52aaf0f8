//! Dense vectors and row-major matrices.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A non-empty vector of finite reals.
#[derive(Clone, PartialEq)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    /// Builds a vector, rejecting empty input and non-finite elements.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("vector must have at least one element"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "non-finite vector element at index {i}"
            )));
        }
        Ok(Vector(values))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "zero-length vector");
        Vector(vec![T::zero(); len])
    }

    /// Wraps values produced by arithmetic on already-valid operands.
    pub(crate) fn from_vec(values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        Vector(values)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &[T]) -> T {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> T {
        self.dot(&self.0).sqrt()
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: fmt::Debug> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Vector<T> {
    type Error = Error;

    fn try_from(values: Vec<T>) -> Result<Self> {
        Vector::new(values)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "matrix shape {rows}x{cols} has an empty side"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::shapes(
                "Matrix::new",
                format!("{rows}x{cols}"),
                format!("{} values", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "non-finite matrix element at ({}, {})",
                i / cols,
                i % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Stacks equal-length rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shapes(
                    "Matrix::from_rows",
                    format!("row 0 width {cols}"),
                    format!("row {i} width {}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Copies the listed rows into a new matrix, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_parts(indices.len(), self.cols, data)
    }

    /// Adds `bias` to every row.
    pub(crate) fn add_row_bias(&mut self, bias: &[T]) {
        debug_assert_eq!(bias.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols) {
            for (v, b) in row.iter_mut().zip(bias) {
                *v += *b;
            }
        }
    }

    /// Column sums, i.e. `1ᵀ A`.
    pub(crate) fn column_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for row in self.iter_rows() {
            for (o, v) in out.iter_mut().zip(row) {
                *o += *v;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &self.data)
            .finish()
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let d = *x - *y;
        acc + d * d
    })
}

/// `W x + b`.
pub fn linear_forward<T: Scalar>(w: &Matrix<T>, b: &[T], x: &[T]) -> Result<Vector<T>> {
    if w.cols() != x.len() {
        return Err(Error::shapes(
            "linear_forward",
            format!("W {}x{}", w.rows(), w.cols()),
            format!("x len {}", x.len()),
        ));
    }
    if b.len() != w.rows() {
        return Err(Error::shapes(
            "linear_forward",
            format!("W {}x{}", w.rows(), w.cols()),
            format!("b len {}", b.len()),
        ));
    }
    let out = w
        .iter_rows()
        .zip(b)
        .map(|(row, bi)| dot(row, x) + *bi)
        .collect();
    Ok(Vector::from_vec(out))
}

/// `A Bᵀ` for `A: m x k`, `B: n x k`.
pub fn matmul_nt<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols() != b.cols() {
        return Err(Error::shapes(
            "matmul_nt",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.rows());
    let mut out = Matrix::zeros(m, n);
    T::gemm(
        m,
        k,
        n,
        T::one(),
        a.as_slice(),
        (k as isize, 1),
        b.as_slice(),
        (1, k as isize),
        T::zero(),
        out.as_mut_slice(),
        (n as isize, 1),
    );
    Ok(out)
}

/// `A B` for `A: m x k`, `B: k x n`.
pub fn matmul_nn<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::shapes(
            "matmul_nn",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Matrix::zeros(m, n);
    T::gemm(
        m,
        k,
        n,
        T::one(),
        a.as_slice(),
        (k as isize, 1),
        b.as_slice(),
        (n as isize, 1),
        T::zero(),
        out.as_mut_slice(),
        (n as isize, 1),
    );
    Ok(out)
}

/// `Aᵀ B` for `A: k x m`, `B: k x n`.
pub fn matmul_tn<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::shapes(
            "matmul_tn",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let (m, k, n) = (a.cols(), a.rows(), b.cols());
    let mut out = Matrix::zeros(m, n);
    T::gemm(
        m,
        k,
        n,
        T::one(),
        a.as_slice(),
        (1, m as isize),
        b.as_slice(),
        (n as isize, 1),
        T::zero(),
        out.as_mut_slice(),
        (n as isize, 1),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn transpose(a: &Matrix<f64>) -> Matrix<f64> {
        let mut out = Matrix::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out.set(j, i, a.get(i, j));
            }
        }
        out
    }

    fn filled(rows: usize, cols: usize, seed: f64) -> Matrix<f64> {
        let data = (0..rows * cols)
            .map(|i| ((i as f64 + seed) * 0.37).sin())
            .collect();
        Matrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn linear_forward_identity() {
        let w = Matrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = linear_forward(&w, &[0.0, 0.0], &[3.0, -1.0]).unwrap();
        assert_eq!(y.as_slice(), &[3.0, -1.0]);
    }

    #[test]
    fn linear_forward_affine() {
        let w = Matrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let y = linear_forward(&w, &[0.5], &[1.0, 2.0]).unwrap();
        assert_eq!(y.as_slice(), &[3.5]);
    }

    #[test]
    fn linear_forward_zero_weights_pass_bias() {
        let w = Matrix::<f64>::zeros(2, 2);
        let y = linear_forward(&w, &[7.0, -7.0], &[123.0, -4.5]).unwrap();
        assert_eq!(y.as_slice(), &[7.0, -7.0]);
    }

    #[test]
    fn linear_forward_rejects_bad_shapes() {
        let w = Matrix::<f64>::zeros(2, 3);
        let err = linear_forward(&w, &[0.0, 0.0], &[1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("2x3"), "{err}");
        assert!(linear_forward(&w, &[0.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn matmul_variants_match_naive() {
        let a = filled(5, 7, 0.0);
        let b = filled(7, 3, 1.0);
        let expect = naive(&a, &b);
        let nn = matmul_nn(&a, &b).unwrap();
        let nt = matmul_nt(&a, &transpose(&b)).unwrap();
        let tn = matmul_tn(&transpose(&a), &b).unwrap();
        for m in [&nn, &nt, &tn] {
            for (x, y) in m.as_slice().iter().zip(expect.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_and_matrix_reject_invalid_values() {
        assert!(Vector::<f64>::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }
}
