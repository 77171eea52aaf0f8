use crate::error::{Error, Result};
use crate::numerics::linalg::Vector;
use crate::scalar::Scalar;

/// Beyond this magnitude the logistic function is evaluated on the
/// non-overflowing branch only.
const SIGMOID_SATURATION: f64 = 500.0;

pub fn relu<T: Scalar>(x: &[T]) -> Vector<T> {
    Vector::from_vec(x.iter().map(|&v| relu_scalar(v)).collect())
}

#[inline]
pub(crate) fn relu_scalar<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

pub fn sigmoid<T: Scalar>(x: &[T]) -> Vector<T> {
    Vector::from_vec(x.iter().map(|&v| sigmoid_scalar(v)).collect())
}

/// Logistic function that never evaluates `exp` of a large positive number.
///
/// The result is clamped to the representable open interval: `1 / (1 + e^-x)`
/// rounds to exactly 1 for x above ~37 in double precision.
#[inline]
pub fn sigmoid_scalar<T: Scalar>(v: T) -> T {
    let one = T::one();
    let s = if v >= T::zero() {
        let v = v.min(T::of(SIGMOID_SATURATION));
        one / (one + (-v).exp())
    } else {
        let v = v.max(T::of(-SIGMOID_SATURATION));
        let e = v.exp();
        e / (one + e)
    };
    s.max(T::min_positive_value())
        .min(one - T::epsilon() / T::of(2.0))
}

/// Scales `x` to unit Euclidean norm.
pub fn l2_normalize<T: Scalar>(x: &[T]) -> Result<Vector<T>> {
    let norm = x.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::Degenerate(
            "cannot normalize a zero-norm vector".into(),
        ));
    }
    Ok(Vector::from_vec(x.iter().map(|v| *v / norm).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn relu_examples() {
        assert_eq!(relu(&[-1.0, 0.0, 2.0]).as_slice(), &[0.0, 0.0, 2.0]);
        assert_eq!(relu(&[-3.0, -0.1]).as_slice(), &[0.0, 0.0]);
        assert_eq!(relu(&[0.2, 5.0]).as_slice(), &[0.2, 5.0]);
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid(&[0.0])[0], 0.5);
        let s = sigmoid(&[1000.0_f64])[0];
        assert!(s.is_finite() && s < 1.0 && s > 1.0 - 1e-12);
        let lo = sigmoid(&[-1000.0_f64])[0];
        assert!(lo.is_finite() && lo > 0.0);
        assert!((sigmoid(&[3.0_f64.ln()])[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let v = l2_normalize(&[3.0_f64, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        assert_eq!(l2_normalize(&[0.0, 1.0]).unwrap().as_slice(), &[0.0, 1.0]);
        assert!(matches!(
            l2_normalize(&[0.0, 0.0]),
            Err(Error::Degenerate(_))
        ));
    }

    proptest! {
        #[test]
        fn sigmoid_in_open_interval_and_symmetric(x in -400.0f64..400.0) {
            let s = sigmoid_scalar(x);
            prop_assert!(s > 0.0 && s < 1.0);
            prop_assert!((sigmoid_scalar(-x) - (1.0 - s)).abs() < 1e-12);
        }

        #[test]
        fn normalize_is_idempotent(v in proptest::collection::vec(-10.0f64..10.0, 1..16)) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
            let once = l2_normalize(&v).unwrap();
            let twice = l2_normalize(&once).unwrap();
            prop_assert!((once.norm() - 1.0).abs() < 1e-12);
            for (a, b) in once.iter().zip(twice.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
