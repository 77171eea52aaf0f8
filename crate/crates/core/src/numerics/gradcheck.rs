use crate::numerics::linalg::Vector;
use crate::scalar::Scalar;

/// Central-difference gradient of `f` at `x`:
/// `(f(x + h e_i) - f(x - h e_i)) / 2h` for every coordinate `i`.
pub fn finite_diff_grad<T, F>(f: F, x: &[T], h: T) -> Vector<T>
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    assert!(h > T::zero(), "finite difference step must be positive");
    let mut probe = x.to_vec();
    let two_h = h + h;
    let grad = (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / two_h
        })
        .collect();
    Vector::from_vec(grad)
}

/// `|a - b| / max(|a|, |b|, floor)`; the floor keeps the ratio meaningful
/// when both values are close to zero.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
