//! Mixup triplet training with the Constituency loss.

pub mod adam;
pub mod loss;
pub mod sampler;
pub mod trainer;

pub use adam::{AdamConfig, AdamState};
pub use loss::{build_beta, constituency_loss, BetaVector, ConstituencyLoss};
pub use sampler::{sample_alpha, sample_pair, PairSampler, SourcePair};
pub use trainer::{
    train, train_with_observer, StepRecord, TrainConfig, TrainOutcome, TrainingHistory,
};

use crate::network::{Gradients, NetworkParams};
use crate::scalar::Scalar;
use crate::Result;

/// Applies one Adam update to every network tensor.
pub fn adam_step<T: Scalar>(
    state: &mut AdamState<T>,
    params: &mut NetworkParams<T>,
    grads: &Gradients<T>,
    cfg: &AdamConfig,
) -> Result<()> {
    state.step(&mut params.tensors_mut(), &grads.tensors(), cfg)
}
