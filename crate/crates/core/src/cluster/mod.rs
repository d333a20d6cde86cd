//! Clustering on precomputed distances and external evaluation metrics.

mod hungarian;
mod kmeans;
mod mds;
mod metrics;
mod spectral;

pub use hungarian::max_weight_assignment;
pub use kmeans::{kmeans, KMeansFit, KMeansOptions};
pub use mds::{classical_mds, MdsEmbedding};
pub use metrics::{
    accuracy, adjusted_rand_index, avg_purity, evaluate, mean_report, normalized_mutual_information, purity,
    Contingency, EvaluationReport, MetricsRecord,
};
pub use spectral::{
    cluster_distances, euclidean_distances, kmeans_euclidean, kmeans_on_distances, spectral_cluster, spectral_embedding,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ErrorKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("cluster count {k} invalid for {m} points")]
    InvalidK { k: usize, m: usize },
    #[error("affinity bandwidth is zero: every distance vanishes")]
    DegenerateAffinity,
    #[error("classical MDS found no positive eigenvalue")]
    DegenerateEmbedding,
    #[error("embedding dimension {dim} must be in [1, {max}]")]
    InvalidEmbedDim { dim: usize, max: usize },
    #[error("label vectors differ in length: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("label vectors are empty")]
    EmptyLabels,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("unknown clustering method '{0}'")]
    UnknownMethod(String),
}

impl ClusterError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ClusterError::InvalidK { .. } | ClusterError::InvalidEmbedDim { .. } | ClusterError::UnknownMethod(_) => {
                ErrorKind::Config
            }
            ClusterError::LengthMismatch { .. } | ClusterError::EmptyLabels => ErrorKind::Data,
            ClusterError::DegenerateAffinity | ClusterError::DegenerateEmbedding | ClusterError::NonFinite => {
                ErrorKind::Numerical
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusteringMethod {
    /// Normalized spectral clustering on a Gaussian affinity of `D`.
    SpectralPrecomputed,
    /// k-means on classical MDS coordinates of `D`.
    KMeansOnMdsEmbedding,
    /// k-means directly on Euclidean coordinates.
    KMeansEuclidean,
}

impl ClusteringMethod {
    pub fn name(self) -> &'static str {
        match self {
            ClusteringMethod::SpectralPrecomputed => "spectral",
            ClusteringMethod::KMeansOnMdsEmbedding => "kmeans-mds",
            ClusteringMethod::KMeansEuclidean => "kmeans-euclidean",
        }
    }
}

impl fmt::Display for ClusteringMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClusteringMethod {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "spectral" | "spectral-precomputed" => Ok(ClusteringMethod::SpectralPrecomputed),
            "kmeans-mds" | "kmeans" | "k-means" => Ok(ClusteringMethod::KMeansOnMdsEmbedding),
            "kmeans-euclidean" => Ok(ClusteringMethod::KMeansEuclidean),
            _ => Err(ClusterError::UnknownMethod(s.to_string())),
        }
    }
}

/// Cluster assignment of every point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub k: usize,
    pub method: ClusteringMethod,
    pub seed: u64,
}

impl ClusteringResult {
    pub(crate) fn single_cluster(m: usize, method: ClusteringMethod, seed: u64) -> Self {
        Self { labels: vec![0; m], k: 1, method, seed }
    }
}

pub(crate) fn check_k(k: usize, m: usize) -> Result<(), ClusterError> {
    if k == 0 || k > m {
        return Err(ClusterError::InvalidK { k, m });
    }
    Ok(())
}
