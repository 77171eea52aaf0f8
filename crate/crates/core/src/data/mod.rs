//! Labelled feature datasets: CSV ingestion, synthetic benchmarks,
//! stratified splits and class prototypes.

pub mod csv;
pub mod dataset;
pub mod prototypes;
pub mod split;
pub mod synthetic;

pub use self::csv::{
    load_feature_csv, load_prototypes, parse_feature_csv, write_feature_csv, write_prototypes,
};
pub use dataset::{LabeledDataset, NOVEL_LABEL};
pub use prototypes::{compute_prototypes, kmeans, KMeans, PrototypeSet, DEFAULT_KMEANS_ITERS};
pub use split::split;
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticData};
