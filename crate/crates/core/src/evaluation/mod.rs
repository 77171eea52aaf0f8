//! Metrics, threshold selection and the synthetic benchmark harness.

pub mod benchmark;
pub mod probe;
pub mod roc;
pub mod sweep;
pub mod threshold;

pub use benchmark::{
    baseline_auc, nearest_prototype_scores, run_benchmark, Benchmark, BenchmarkConfig, Evaluation,
    STREAM_PROBE, STREAM_PROTOTYPES,
};
pub use probe::{train_linear_probe, LinearProbe, ProbeConfig};
pub use roc::{roc_auc, roc_from_labels, RocPoint, RocResult};
pub use sweep::{sweep, sweep_trained, SweepKind, SweepPoint, SweepReport};
pub use threshold::choose_threshold;
