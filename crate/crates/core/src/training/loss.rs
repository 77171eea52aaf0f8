//! Mixing targets and the Constituency loss.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Target proportions for one triplet.
///
/// `values[c - 1]` is the share of class `c` in the mixture. The support
/// (mixing set) holds one class for a matched pair and two for a
/// non-matched pair; every other entry is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaVector<T> {
    values: Vec<T>,
    support: Vec<usize>,
}

impl<T: Scalar> BetaVector<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Classes (1-based) in the mixing set.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    pub fn is_matched(&self) -> bool {
        self.support.len() == 1
    }

    pub fn in_support(&self, class: usize) -> bool {
        self.support.contains(&class)
    }
}

/// Target for `x_k = alpha * x_i + (1 - alpha) * x_j` with `x_i` of class
/// `class_i` and `x_j` of class `class_j` (classes are 1-based).
///
/// Distinct classes give `alpha` and `1 - alpha` at their positions; equal
/// classes give a single 1.
pub fn build_beta<T: Scalar>(
    class_i: usize,
    class_j: usize,
    alpha: T,
    num_classes: usize,
) -> Result<BetaVector<T>> {
    for c in [class_i, class_j] {
        if c == 0 || c > num_classes {
            return Err(Error::contract(format!(
                "class {c} is outside 1..={num_classes}"
            )));
        }
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::contract(format!(
            "mixing coefficient {alpha} is not in (0, 1)"
        )));
    }
    let mut values = vec![T::zero(); num_classes];
    let support = if class_i == class_j {
        values[class_i - 1] = T::one();
        vec![class_i]
    } else {
        values[class_i - 1] = alpha;
        values[class_j - 1] = T::one() - alpha;
        vec![class_i, class_j]
    };
    Ok(BetaVector { values, support })
}

/// Value and gradient of the Constituency loss for one output vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstituencyLoss<T> {
    /// `zero_set + g * nonzero_set`.
    pub total: T,
    /// `Σ_{r ∉ m} u[r]²`, the penalty on classes outside the mixing set.
    pub zero_set: T,
    /// `Σ_{r ∈ m} (u[r] - β[r])²`, unweighted.
    pub nonzero_set: T,
    /// `dL/du`: `2 u[r]` off the support, `2 g (u[r] - β[r])` on it.
    pub gradient: Vec<T>,
}

/// `L = Σ_{r ∉ m} u[r]² + g · Σ_{r ∈ m} (u[r] - β[r])²`.
pub fn constituency_loss<T: Scalar>(
    u: &[T],
    beta: &BetaVector<T>,
    g: T,
) -> Result<ConstituencyLoss<T>> {
    if u.len() != beta.num_classes() {
        return Err(Error::shapes(
            "constituency_loss",
            format!("u len {}", u.len()),
            format!("beta len {}", beta.num_classes()),
        ));
    }
    let two = T::of(2.0);
    let mut zero_set = T::zero();
    let mut nonzero_set = T::zero();
    let mut gradient = vec![T::zero(); u.len()];
    for (r, (&ur, &br)) in u.iter().zip(beta.values()).enumerate() {
        if beta.in_support(r + 1) {
            let d = ur - br;
            nonzero_set += d * d;
            gradient[r] = two * g * d;
        } else {
            zero_set += ur * ur;
            gradient[r] = two * ur;
        }
    }
    Ok(ConstituencyLoss {
        total: zero_set + g * nonzero_set,
        zero_set,
        nonzero_set,
        gradient,
    })
}
