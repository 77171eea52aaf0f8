//! Floating-point element type shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar: `f32` or `f64`.
///
/// Besides the usual arithmetic bounds, a scalar knows how to run a strided
/// general matrix multiply, which is the one kernel the network needs to be
/// fast. Both implementations dispatch to `matrixmultiply`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Name written into checkpoints so a file is never read back at a
    /// different precision.
    const NAME: &'static str;

    /// `C = alpha * A * B + beta * C` over strided row/column layouts.
    ///
    /// `A` is `m x k`, `B` is `k x n`, `C` is `m x n`. Strides are in
    /// elements. Callers guarantee every addressed element is in bounds.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        beta: Self,
        c: &mut [Self],
        c_strides: (isize, isize),
    );

    /// Lossless-enough conversion from an `f64` constant.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Checks that the largest element addressed by a strided `rows x cols`
/// view lies inside a buffer of length `len`.
fn view_fits(rows: usize, cols: usize, strides: (isize, isize), len: usize) -> bool {
    if rows == 0 || cols == 0 {
        return true;
    }
    let (rs, cs) = strides;
    if rs < 0 || cs < 0 {
        return false;
    }
    let last = (rows - 1) * rs as usize + (cols - 1) * cs as usize;
    last < len
}

macro_rules! impl_scalar {
    ($t:ty, $name:literal, $kernel:path) => {
        impl Scalar for $t {
            const NAME: &'static str = $name;

            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                a_strides: (isize, isize),
                b: &[Self],
                b_strides: (isize, isize),
                beta: Self,
                c: &mut [Self],
                c_strides: (isize, isize),
            ) {
                assert!(
                    view_fits(m, k, a_strides, a.len()),
                    "gemm: A view out of bounds"
                );
                assert!(
                    view_fits(k, n, b_strides, b.len()),
                    "gemm: B view out of bounds"
                );
                assert!(
                    view_fits(m, n, c_strides, c.len()),
                    "gemm: C view out of bounds"
                );
                // SAFETY: the three asserts above bound every element the
                // kernel reads or writes; `c` is uniquely borrowed.
                unsafe {
                    $kernel(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        a_strides.0,
                        a_strides.1,
                        b.as_ptr(),
                        b_strides.0,
                        b_strides.1,
                        beta,
                        c.as_mut_ptr(),
                        c_strides.0,
                        c_strides.1,
                    );
                }
            }
        }
    };
}

impl_scalar!(f32, "f32", matrixmultiply::sgemm);
impl_scalar!(f64, "f64", matrixmultiply::dgemm);
