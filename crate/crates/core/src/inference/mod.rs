//! Test-time novelty scoring.

pub mod config;
pub mod io;
pub mod pipeline;

pub use config::{InferenceConfig, TopN};
pub use io::{
    load_class_scores, load_scores, parse_class_scores, parse_scores, write_scores, ScoreRecord,
};
pub use pipeline::{
    decide_novel, membership_score, mix_with_prototype, prediction_matrix, score_dataset,
    select_top_n, NoveltyVerdict, PredictionMatrix, Scorer,
};
