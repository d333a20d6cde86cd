//! Ingestion, preprocessing, configuration, experiment orchestration and
//! result files.

mod config;
mod experiment;
mod export;
mod expression;
mod matrix_file;

pub use config::{preset, ClusteringConfig, PipelineConfig, PRESET_NAMES};
pub use experiment::{run_experiment, BaselineKind, ExperimentOutcome, SeedOutcome};
pub use export::{
    export_scatter, meta_path, read_distance_matrix, read_labels, write_distance_matrix, write_json, write_labels,
    write_scatter, DistanceMeta,
};
pub use expression::{
    load_labels, load_matrix, preprocess, ClassLabels, ExpressionMatrix, FileFormat, LoadOptions, Orientation,
    PreprocessOptions,
};
pub use matrix_file::{format_f64, read_numeric_matrix, write_numeric_matrix, Delimiter};

use std::path::Path;

use thiserror::Error;

use crate::error::ErrorKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("non-numeric token '{token}' at row {row}, column {col}")]
    Parse { row: usize, col: usize, token: String },
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("{labels} labels for {samples} samples")]
    LabelLengthMismatch { labels: usize, samples: usize },
    #[error("negative value {value} at row {row}, column {col}; normalization needs nonnegative data")]
    NegativeValues { row: usize, col: usize, value: f64 },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("no numeric data")]
    Empty,
    #[error("{0} identifiers for {1} entries")]
    IdLengthMismatch(usize, usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("serialization error: {0}")]
    Json(String),
}

impl IoError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            IoError::Config(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn file(path: &Path, err: impl std::fmt::Display) -> Self {
        IoError::File { path: path.display().to_string(), message: err.to_string() }
    }
}
