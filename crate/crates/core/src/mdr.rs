//! Multiscale dimension reduction: one `M × n` embedding per scale.
//!
//! Built-in backends are a PCA baseline (scale-blind) and Laplacian
//! eigenmaps on a k-nearest-neighbor graph with `k = scale`. The external
//! backend reads embeddings computed elsewhere, one delimited file per scale.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::SVD;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ErrorKind;
use crate::io::{self, IoError};
use crate::linalg::{fix_column_signs, pairwise_sq_distances, symmetric_eigen_desc};
use crate::scales::ScaleSet;
use crate::Matrix;

/// Background affinity added when the neighbor graph is disconnected.
pub const DISCONNECTED_EPSILON: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdrError {
    #[error("requested dimension {dim} exceeds the available {available}")]
    DimTooLarge { dim: usize, available: usize },
    #[error("scale {scale} outside [2, {limit})")]
    ScaleOutOfRange { scale: usize, limit: usize },
    #[error("external backend needs a file pattern containing '{{scale}}'")]
    MissingPattern,
    #[error("embedding {index} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch { index: usize, got: (usize, usize), expected: (usize, usize) },
    #[error("embedding {index} contains non-finite values")]
    NonFinite { index: usize },
    #[error("stack needs one embedding per scale: {scales} scales, {embeddings} embeddings")]
    CountMismatch { scales: usize, embeddings: usize },
    #[error("duplicate scale {0} in stack")]
    DuplicateScale(usize),
    #[error("input must have at least one row and one column")]
    EmptyInput,
    #[error("reading external embedding: {0}")]
    External(String),
    #[error("unknown embedding method '{0}'")]
    UnknownMethod(String),
    #[error("at scale {scale}: {source}")]
    AtScale {
        scale: usize,
        #[source]
        source: Box<MdrError>,
    },
}

impl MdrError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            MdrError::AtScale { source, .. } => source.kind(),
            MdrError::UnknownMethod(_) | MdrError::MissingPattern => ErrorKind::Config,
            MdrError::External(_) | MdrError::ShapeMismatch { .. } | MdrError::EmptyInput => ErrorKind::Data,
            MdrError::NonFinite { .. } | MdrError::CountMismatch { .. } | MdrError::DuplicateScale(_) => {
                ErrorKind::Numerical
            }
            MdrError::DimTooLarge { .. } | MdrError::ScaleOutOfRange { .. } => ErrorKind::Config,
        }
    }
}

impl From<IoError> for MdrError {
    fn from(e: IoError) -> Self {
        MdrError::External(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdrMethod {
    PcaBaseline,
    LaplacianEigenmaps,
    External,
}

impl MdrMethod {
    pub fn name(self) -> &'static str {
        match self {
            MdrMethod::PcaBaseline => "pca",
            MdrMethod::LaplacianEigenmaps => "laplacian-eigenmaps",
            MdrMethod::External => "external",
        }
    }
}

impl fmt::Display for MdrMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MdrMethod {
    type Err = MdrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pca" | "pca-baseline" => Ok(MdrMethod::PcaBaseline),
            "laplacian-eigenmaps" | "laplacian" | "le" => Ok(MdrMethod::LaplacianEigenmaps),
            "external" => Ok(MdrMethod::External),
            _ => Err(MdrError::UnknownMethod(s.to_string())),
        }
    }
}

/// Backend selection plus its options.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdrBackendSpec {
    pub method: MdrMethod,
    pub embedding_dim: usize,
    /// File pattern with a `{scale}` placeholder, for [`MdrMethod::External`].
    pub external_pattern: Option<String>,
}

impl MdrBackendSpec {
    pub fn laplacian(embedding_dim: usize) -> Self {
        Self { method: MdrMethod::LaplacianEigenmaps, embedding_dim, external_pattern: None }
    }

    pub fn pca(embedding_dim: usize) -> Self {
        Self { method: MdrMethod::PcaBaseline, embedding_dim, external_pattern: None }
    }

    pub fn external(embedding_dim: usize, pattern: impl Into<String>) -> Self {
        Self {
            method: MdrMethod::External,
            embedding_dim,
            external_pattern: Some(pattern.into()),
        }
    }

    pub fn external_path(&self, scale: usize) -> Result<PathBuf, MdrError> {
        match &self.external_pattern {
            Some(p) if p.contains("{scale}") => Ok(PathBuf::from(p.replace("{scale}", &scale.to_string()))),
            _ => Err(MdrError::MissingPattern),
        }
    }
}

/// One embedding per scale, rows aligned by sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStack {
    scales: Vec<usize>,
    embeddings: Vec<Matrix>,
    seed: u64,
}

impl EmbeddingStack {
    /// Checks that there is one finite `M × n` matrix per (distinct) scale.
    pub fn new(scales: Vec<usize>, embeddings: Vec<Matrix>, seed: u64) -> Result<Self, MdrError> {
        if scales.len() != embeddings.len() || scales.is_empty() {
            return Err(MdrError::CountMismatch { scales: scales.len(), embeddings: embeddings.len() });
        }
        let mut seen = HashSet::new();
        if let Some(&dup) = scales.iter().find(|s| !seen.insert(**s)) {
            return Err(MdrError::DuplicateScale(dup));
        }
        let expected = embeddings[0].shape();
        if expected.0 == 0 || expected.1 == 0 {
            return Err(MdrError::EmptyInput);
        }
        for (index, e) in embeddings.iter().enumerate() {
            if e.shape() != expected {
                return Err(MdrError::ShapeMismatch { index, got: e.shape(), expected });
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err(MdrError::NonFinite { index });
            }
        }
        Ok(Self { scales, embeddings, seed })
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn embeddings(&self) -> &[Matrix] {
        &self.embeddings
    }

    pub fn into_embeddings(self) -> Vec<Matrix> {
        self.embeddings
    }

    /// `p`.
    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    /// `M`.
    pub fn sample_count(&self) -> usize {
        self.embeddings[0].nrows()
    }

    /// `n`.
    pub fn embedding_dim(&self) -> usize {
        self.embeddings[0].ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same embeddings listed in a different scale order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self, MdrError> {
        let scales = order.iter().map(|&i| self.scales[i]).collect();
        let embeddings = order.iter().map(|&i| self.embeddings[i].clone()).collect();
        Self::new(scales, embeddings, self.seed)
    }

    /// Rows permuted: row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted_rows(&self, perm: &[usize]) -> Self {
        let embeddings = self
            .embeddings
            .iter()
            .map(|e| Matrix::from_fn(perm.len(), e.ncols(), |r, c| e[(perm[r], c)]))
            .collect();
        Self { scales: self.scales.clone(), embeddings, seed: self.seed }
    }

    /// Mean of the embeddings over scales (the "averaged embedding" baseline).
    pub fn averaged(&self) -> Matrix {
        let mut sum = Matrix::zeros(self.sample_count(), self.embedding_dim());
        for e in &self.embeddings {
            sum += e;
        }
        sum / self.len() as f64
    }
}

/// Centered data projected onto the top `dim` principal axes.
///
/// Each loading vector's largest-magnitude entry is made positive.
pub fn pca_reduce(x: &Matrix, dim: usize) -> Result<Matrix, MdrError> {
    let (m, n) = x.shape();
    if m == 0 || n == 0 {
        return Err(MdrError::EmptyInput);
    }
    let available = m.min(n);
    if dim == 0 || dim > available {
        return Err(MdrError::DimTooLarge { dim, available });
    }
    let mut centered = x.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let svd = SVD::new(centered.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let mut loadings = Matrix::from_fn(n, dim, |r, c| v_t[(order[c], r)]);
    fix_column_signs(&mut loadings);
    Ok(centered * loadings)
}

/// Laplacian eigenmaps with `k = scale` nearest neighbors.
///
/// The graph is the union of the k-NN relations, weighted by
/// `exp(−d²/(σ_i σ_j))` with `σ_i` the distance from `i` to its `⌈k/2⌉`-th
/// neighbor. Returns eigenvectors 2..=dim+1 of the symmetric normalized
/// Laplacian, rescaled by `degree^(−1/2)`.
pub fn laplacian_eigenmaps(x: &Matrix, scale: usize, dim: usize) -> Result<Matrix, MdrError> {
    let m = x.nrows();
    if m == 0 || x.ncols() == 0 {
        return Err(MdrError::EmptyInput);
    }
    if scale < 2 || scale >= m {
        return Err(MdrError::ScaleOutOfRange { scale, limit: m });
    }
    if dim == 0 || dim + 1 > m {
        return Err(MdrError::DimTooLarge { dim, available: m - 1 });
    }
    let sq = pairwise_sq_distances(x);
    let neighbors: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| sq[(i, a)].total_cmp(&sq[(i, b)]).then(a.cmp(&b)));
            others.truncate(scale);
            others
        })
        .collect();
    let band_rank = scale.div_ceil(2);
    let bandwidth: Vec<f64> = neighbors
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let sigma = sq[(i, nb[band_rank - 1])].sqrt();
            if sigma > 0.0 {
                return sigma;
            }
            // duplicates: fall back to the nearest distinct neighbor, then 1
            nb.iter().map(|&j| sq[(i, j)].sqrt()).find(|&d| d > 0.0).unwrap_or(1.0)
        })
        .collect();

    let mut weights = Matrix::zeros(m, m);
    for (i, nb) in neighbors.iter().enumerate() {
        for &j in nb {
            let w = (-sq[(i, j)] / (bandwidth[i] * bandwidth[j])).exp();
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    let connected = is_connected(&weights);
    let degrees_positive = weights.row_iter().all(|r| r.sum() > 0.0);
    if !connected || !degrees_positive {
        log::debug!("scale {scale}: neighbor graph disconnected, adding background affinity");
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    weights[(i, j)] += DISCONNECTED_EPSILON;
                }
            }
        }
    }
    let inv_sqrt_deg: Vec<f64> = weights.row_iter().map(|r| 1.0 / r.sum().sqrt()).collect();
    let normalized = Matrix::from_fn(m, m, |i, j| weights[(i, j)] * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    // largest eigenvalues of D^-1/2 W D^-1/2 are the smallest of I - D^-1/2 W D^-1/2
    let (_, vectors) = symmetric_eigen_desc(normalized);
    let mut embedding = Matrix::from_fn(m, dim, |r, c| vectors[(r, c + 1)] * inv_sqrt_deg[r]);
    fix_column_signs(&mut embedding);
    Ok(embedding)
}

fn is_connected(weights: &Matrix) -> bool {
    let m = weights.nrows();
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..m {
            if !seen[j] && weights[(i, j)] > 0.0 {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == m
}

/// Embedding of `x` at one scale.
pub fn mdr_embed(x: &Matrix, scale: usize, spec: &MdrBackendSpec) -> Result<Matrix, MdrError> {
    match spec.method {
        MdrMethod::PcaBaseline => pca_reduce(x, spec.embedding_dim),
        MdrMethod::LaplacianEigenmaps => laplacian_eigenmaps(x, scale, spec.embedding_dim),
        MdrMethod::External => {
            let path = spec.external_path(scale)?;
            let e = io::read_numeric_matrix(&path, io::Delimiter::from_path(&path))?;
            let expected = (x.nrows(), spec.embedding_dim);
            if e.shape() != expected {
                return Err(MdrError::ShapeMismatch { index: 0, got: e.shape(), expected });
            }
            Ok(e)
        }
    }
}

/// Runs the backend once per scale, in parallel, and assembles the
/// embeddings in scale order.
pub fn build_stack(x: &Matrix, scales: &ScaleSet, spec: &MdrBackendSpec, seed: u64) -> Result<EmbeddingStack, MdrError> {
    if spec.method == MdrMethod::External && spec.external_pattern.is_none() {
        return Err(MdrError::MissingPattern);
    }
    let embeddings = scales
        .as_slice()
        .par_iter()
        .map(|&scale| {
            mdr_embed(x, scale, spec).map_err(|e| MdrError::AtScale { scale, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    EmbeddingStack::new(scales.as_slice().to_vec(), embeddings, seed)
}
