//! Novelty detection by mixture decomposition.
//!
//! A three-branch network is trained to tell which known classes make up a
//! convex mixture of two samples. At test time a query is mixed with each
//! class prototype; queries whose mixtures the network cannot explain are
//! flagged as novel.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`.

// Negated comparisons are how the validators reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod network;
pub mod numerics;
pub mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = numerics::Matrix<f64>;
pub type Vector = numerics::Vector<f64>;
pub type Dataset = data::LabeledDataset<f64>;
pub type Prototypes = data::PrototypeSet<f64>;
pub type Network = network::NetworkParams<f64>;
