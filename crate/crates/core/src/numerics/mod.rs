//! Linear algebra, activations, seeded randomness and finite differences.

pub mod activation;
pub mod fpenv;
pub mod gradcheck;
pub mod linalg;
pub mod rng;

pub use activation::{l2_normalize, relu, sigmoid};
pub use fpenv::FlushSubnormals;
pub use gradcheck::{finite_diff_grad, relative_error};
pub use linalg::{linear_forward, matmul_nn, matmul_nt, matmul_tn, Matrix, Vector};
pub use rng::{rng_uniform, RngStream};
