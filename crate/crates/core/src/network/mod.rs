//! The segregation network: three fully connected layers whose first layer
//! is shared by the three members of an input triplet.

pub mod checkpoint;
pub mod forward;
pub mod params;

pub use checkpoint::{
    checkpoint_to_string, load_checkpoint, parse_checkpoint, save_checkpoint, FORMAT_VERSION,
};
pub use forward::{ForwardCache, TripletBatch};
pub use params::{Architecture, Gradients, NetworkParams, BRANCHES, TENSOR_NAMES};
