//! Batched forward and reverse passes of the segregation network.
//!
//! A batch of `B` triplets is stored as one `3B x d` matrix: rows `0..B`
//! are the first inputs, `B..2B` the second inputs and `2B..3B` the mixtures.
//! The shared first layer then runs as a single matrix product over all three
//! blocks, and the concatenation for sample `b` is
//! `[h(first_b), h(second_b), h(mixed_b)]`.

use crate::error::{Error, Result};
use crate::network::params::{Gradients, NetworkParams, BRANCHES};
use crate::numerics::activation::{relu_scalar, sigmoid_scalar};
use crate::numerics::{matmul_nn, matmul_nt, matmul_tn, Matrix, RngStream, Vector};
use crate::scalar::Scalar;

/// `B` input triplets `(x_i, x_j, x_k)` stacked branch-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TripletBatch<T> {
    len: usize,
    inputs: Matrix<T>,
}

impl<T: Scalar> TripletBatch<T> {
    /// A zero-filled batch of `len` triplets of dimension `dim`.
    pub fn zeros(len: usize, dim: usize) -> Self {
        TripletBatch {
            len,
            inputs: Matrix::zeros(BRANCHES * len, dim),
        }
    }

    pub fn from_triplets(triplets: &[(&[T], &[T], &[T])]) -> Result<Self> {
        let dim = triplets
            .first()
            .map(|t| t.0.len())
            .ok_or_else(|| Error::contract("empty triplet batch"))?;
        let mut batch = Self::zeros(triplets.len(), dim);
        for (b, (xi, xj, xk)) in triplets.iter().enumerate() {
            batch.set(b, xi, xj, xk)?;
        }
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::shapes(
                "TripletBatch",
                format!("input dim {}", self.dim()),
                format!("vector len {got}"),
            ));
        }
        Ok(())
    }

    pub fn set(&mut self, b: usize, xi: &[T], xj: &[T], xk: &[T]) -> Result<()> {
        for x in [xi, xj, xk] {
            self.check_dim(x.len())?;
        }
        self.inputs.row_mut(b).copy_from_slice(xi);
        self.inputs.row_mut(self.len + b).copy_from_slice(xj);
        self.inputs.row_mut(2 * self.len + b).copy_from_slice(xk);
        Ok(())
    }

    /// Stores `(x_i, x_j, alpha * x_i + (1 - alpha) * x_j)` at slot `b`.
    /// The mixture is computed in one pass, element by element.
    pub fn set_mixture(&mut self, b: usize, xi: &[T], xj: &[T], alpha: T) -> Result<()> {
        self.check_dim(xi.len())?;
        self.check_dim(xj.len())?;
        let beta = T::one() - alpha;
        self.inputs.row_mut(b).copy_from_slice(xi);
        self.inputs.row_mut(self.len + b).copy_from_slice(xj);
        let out = self.inputs.row_mut(2 * self.len + b);
        for ((o, a), c) in out.iter_mut().zip(xi).zip(xj) {
            *o = alpha * *a + beta * *c;
        }
        Ok(())
    }

    pub fn first(&self, b: usize) -> &[T] {
        self.inputs.row(b)
    }

    pub fn second(&self, b: usize) -> &[T] {
        self.inputs.row(self.len + b)
    }

    pub fn mixed(&self, b: usize) -> &[T] {
        self.inputs.row(2 * self.len + b)
    }

    pub fn inputs(&self) -> &Matrix<T> {
        &self.inputs
    }
}

/// Intermediate values of one forward pass, kept for the reverse pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    len: usize,
    /// `3B x d` stacked inputs.
    inputs: Matrix<T>,
    /// `3B x h1` first-layer activations (after ReLU, before dropout).
    branch: Matrix<T>,
    /// `B x 3h1` concatenated activations after dropout; input of layer 2.
    concat: Matrix<T>,
    concat_mask: Option<Vec<T>>,
    /// `B x h2` second-layer activations (after ReLU, before dropout).
    hidden: Matrix<T>,
    /// `B x h2` after dropout; input of layer 3.
    hidden_dropped: Matrix<T>,
    hidden_mask: Option<Vec<T>>,
    /// `B x K` output pre-activations.
    logits: Matrix<T>,
    /// `B x K` sigmoid outputs `u`.
    output: Matrix<T>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All outputs, one row per triplet.
    pub fn output(&self) -> &Matrix<T> {
        &self.output
    }

    /// Output `u` of triplet `b`.
    pub fn u(&self, b: usize) -> &[T] {
        self.output.row(b)
    }

    pub fn logits(&self) -> &Matrix<T> {
        &self.logits
    }

    /// First-layer activation of `branch` (0 = first input, 1 = second,
    /// 2 = mixture) for triplet `b`.
    pub fn branch_output(&self, branch: usize, b: usize) -> &[T] {
        self.branch.row(branch * self.len + b)
    }

    /// Second-layer activation of triplet `b` (after ReLU, before dropout).
    pub fn hidden_output(&self, b: usize) -> &[T] {
        self.hidden.row(b)
    }

    /// Concatenated first-layer activations of triplet `b`, before dropout.
    pub fn concatenated(&self, b: usize) -> Vec<T> {
        (0..BRANCHES)
            .flat_map(|s| self.branch_output(s, b).iter().copied())
            .collect()
    }

    pub fn used_dropout(&self) -> bool {
        self.concat_mask.is_some()
    }
}

/// Inverted-dropout mask: each unit survives with probability `1 - p` and
/// survivors are scaled by `1 / (1 - p)`.
///
/// Each 64-bit draw supplies two 32-bit uniforms; a unit is dropped when its
/// uniform falls below `p * 2^32`. Draws are staged in a small buffer and
/// compared as signed 32-bit integers so the selection loop vectorizes
/// instead of branching on a coin flip.
pub(crate) fn dropout_mask<T: Scalar>(len: usize, p: f64, rng: &mut RngStream) -> Vec<T> {
    const CHUNK: usize = 256;
    const FLIP: u32 = 0x8000_0000;
    let scale = T::of(1.0 / (1.0 - p));
    let cut = ((p * 4_294_967_296.0).round() as u64).min(u32::MAX as u64) as u32;
    let cut = (cut ^ FLIP) as i32;
    let mut mask = vec![T::zero(); len];
    let mut draws = [0i32; CHUNK];
    for out in mask.chunks_mut(CHUNK) {
        for pair in draws.chunks_exact_mut(2) {
            let r = rng.next_u64();
            pair[0] = (r as u32 ^ FLIP) as i32;
            pair[1] = ((r >> 32) as u32 ^ FLIP) as i32;
        }
        for (m, &d) in out.iter_mut().zip(&draws) {
            *m = if d >= cut { scale } else { T::zero() };
        }
    }
    mask
}

fn apply_mask<T: Scalar>(values: &mut [T], mask: &[T]) {
    for (v, m) in values.iter_mut().zip(mask) {
        *v *= *m;
    }
}

fn relu_in_place<T: Scalar>(m: &mut Matrix<T>) {
    m.as_mut_slice()
        .iter_mut()
        .for_each(|v| *v = relu_scalar(*v));
}

/// `grad *= 1[activation > 0]`.
fn relu_backward<T: Scalar>(grad: &mut [T], activation: &[T]) {
    for (g, a) in grad.iter_mut().zip(activation) {
        *g = if *a > T::zero() { *g } else { T::zero() };
    }
}

impl<T: Scalar> NetworkParams<T> {
    /// Runs a batch of triplets through the network.
    ///
    /// Passing `Some(rng)` selects training mode: dropout with probability
    /// `dropout_p` is applied to the concatenated first-layer output and to
    /// the second-layer output. `None` is inference mode and is a pure
    /// function of the parameters and inputs.
    pub fn forward_batch(
        &self,
        batch: &TripletBatch<T>,
        dropout: Option<&mut RngStream>,
    ) -> Result<ForwardCache<T>> {
        let arch = self.architecture();
        if batch.dim() != arch.input_dim {
            return Err(Error::shapes(
                "forward",
                format!("network input dim {}", arch.input_dim),
                format!("triplet dim {}", batch.dim()),
            ));
        }
        if batch.is_empty() {
            return Err(Error::contract("forward on an empty batch"));
        }
        let n = batch.len();
        let h1 = arch.hidden1;
        let mut branch = matmul_nt(batch.inputs(), &self.w1)?;
        branch.add_row_bias(&self.b1);
        relu_in_place(&mut branch);

        let mut concat = Matrix::zeros(n, arch.concat_width());
        for b in 0..n {
            let row = concat.row_mut(b);
            for s in 0..BRANCHES {
                row[s * h1..(s + 1) * h1].copy_from_slice(branch.row(s * n + b));
            }
        }

        let (mut rng, p) = match dropout {
            Some(rng) if self.dropout_p > 0.0 => (Some(rng), self.dropout_p),
            _ => (None, 0.0),
        };

        let concat_mask = rng
            .as_deref_mut()
            .map(|r| dropout_mask(concat.as_slice().len(), p, r));
        if let Some(mask) = &concat_mask {
            apply_mask(concat.as_mut_slice(), mask);
        }

        let mut hidden = matmul_nt(&concat, &self.w2)?;
        hidden.add_row_bias(&self.b2);
        relu_in_place(&mut hidden);

        let hidden_mask = rng
            .as_mut()
            .map(|r| dropout_mask(hidden.as_slice().len(), p, r));
        let mut hidden_dropped = hidden.clone();
        if let Some(mask) = &hidden_mask {
            apply_mask(hidden_dropped.as_mut_slice(), mask);
        }

        let mut logits = matmul_nt(&hidden_dropped, &self.w3)?;
        logits.add_row_bias(&self.b3);
        let mut output = logits.clone();
        output
            .as_mut_slice()
            .iter_mut()
            .for_each(|v| *v = sigmoid_scalar(*v));

        Ok(ForwardCache {
            len: n,
            inputs: batch.inputs().clone(),
            branch,
            concat,
            concat_mask,
            hidden,
            hidden_dropped,
            hidden_mask,
            logits,
            output,
        })
    }

    /// Single-triplet forward pass; returns `u` and the cache.
    pub fn forward(
        &self,
        xi: &[T],
        xj: &[T],
        xk: &[T],
        dropout: Option<&mut RngStream>,
    ) -> Result<(Vector<T>, ForwardCache<T>)> {
        let dim = self.architecture().input_dim;
        for x in [xi, xj, xk] {
            if x.len() != dim {
                return Err(Error::shapes(
                    "forward",
                    format!("network input dim {dim}"),
                    format!("vector len {}", x.len()),
                ));
            }
        }
        let batch = TripletBatch::from_triplets(&[(xi, xj, xk)])?;
        let cache = self.forward_batch(&batch, dropout)?;
        Ok((Vector::from_vec(cache.u(0).to_vec()), cache))
    }

    /// Gradient flowing into the stacked first-layer activations
    /// (`3B x h1`, already masked by the ReLU derivative), plus the
    /// gradients of layers 2 and 3.
    fn backward_to_branches(
        &self,
        cache: &ForwardCache<T>,
        d_output: &Matrix<T>,
    ) -> Result<(Matrix<T>, Gradients<T>)> {
        let arch = self.architecture();
        if d_output.shape() != (cache.len, arch.num_classes) {
            return Err(Error::shapes(
                "backward",
                format!("expected dL/du {}x{}", cache.len, arch.num_classes),
                format!("{:?}", d_output.shape()),
            ));
        }
        if cache.inputs.cols() != arch.input_dim || cache.concat.cols() != arch.concat_width() {
            return Err(Error::shapes(
                "backward",
                format!("{arch:?}"),
                "cache from a different network",
            ));
        }
        let n = cache.len;
        let h1 = arch.hidden1;

        let mut d_logits = d_output.clone();
        for (g, u) in d_logits
            .as_mut_slice()
            .iter_mut()
            .zip(cache.output.as_slice())
        {
            *g *= *u * (T::one() - *u);
        }
        let gw3 = matmul_tn(&d_logits, &cache.hidden_dropped)?;
        let gb3 = d_logits.column_sums();

        let mut d_hidden = matmul_nn(&d_logits, &self.w3)?;
        if let Some(mask) = &cache.hidden_mask {
            apply_mask(d_hidden.as_mut_slice(), mask);
        }
        relu_backward(d_hidden.as_mut_slice(), cache.hidden.as_slice());
        let gw2 = matmul_tn(&d_hidden, &cache.concat)?;
        let gb2 = d_hidden.column_sums();

        let mut d_concat = matmul_nn(&d_hidden, &self.w2)?;
        if let Some(mask) = &cache.concat_mask {
            apply_mask(d_concat.as_mut_slice(), mask);
        }
        let mut d_branch = Matrix::zeros(BRANCHES * n, h1);
        for b in 0..n {
            let row = d_concat.row(b);
            for s in 0..BRANCHES {
                d_branch
                    .row_mut(s * n + b)
                    .copy_from_slice(&row[s * h1..(s + 1) * h1]);
            }
        }
        relu_backward(d_branch.as_mut_slice(), cache.branch.as_slice());

        let grads = Gradients {
            w1: Matrix::zeros(h1, arch.input_dim),
            b1: vec![T::zero(); h1],
            w2: gw2,
            b2: gb2,
            w3: gw3,
            b3: gb3,
        };
        Ok((d_branch, grads))
    }

    /// Exact reverse-mode gradients for upstream `d_output = dL/du`
    /// (`B x K`), summed over the batch. The shared first layer receives the
    /// sum of the three branch contributions.
    pub fn backward(&self, cache: &ForwardCache<T>, d_output: &Matrix<T>) -> Result<Gradients<T>> {
        let (d_branch, mut grads) = self.backward_to_branches(cache, d_output)?;
        grads.w1 = matmul_tn(&d_branch, &cache.inputs)?;
        grads.b1 = d_branch.column_sums();
        Ok(grads)
    }

    /// Single-triplet convenience form of [`backward`](Self::backward).
    pub fn backward_single(&self, cache: &ForwardCache<T>, d_u: &[T]) -> Result<Gradients<T>> {
        let d = Matrix::new(1, d_u.len(), d_u.to_vec())?;
        self.backward(cache, &d)
    }

    /// First-layer gradient split by branch: entry `s` is the `(W1, b1)`
    /// gradient contributed through input slot `s` alone. Their sum is the
    /// first-layer part of [`backward`](Self::backward).
    pub fn branch_gradients(
        &self,
        cache: &ForwardCache<T>,
        d_output: &Matrix<T>,
    ) -> Result<[(Matrix<T>, Vec<T>); 3]> {
        let (d_branch, _) = self.backward_to_branches(cache, d_output)?;
        let n = cache.len;
        let term = |s: usize| -> Result<(Matrix<T>, Vec<T>)> {
            let rows: Vec<usize> = (s * n..(s + 1) * n).collect();
            let d = d_branch.select_rows(&rows);
            let x = cache.inputs.select_rows(&rows);
            Ok((matmul_tn(&d, &x)?, d.column_sums()))
        };
        Ok([term(0)?, term(1)?, term(2)?])
    }
}
