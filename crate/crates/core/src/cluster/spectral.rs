use super::{check_k, classical_mds, kmeans, ClusterError, ClusteringMethod, ClusteringResult, KMeansOptions};
use crate::linalg::{median, pairwise_sq_distances, symmetric_eigen_desc};
use crate::pipeline::DistanceMatrix;
use crate::Matrix;

/// Row-normalized leading eigenvectors of `D^-1/2 A D^-1/2` with the
/// Gaussian affinity `A_ij = exp(−d_ij² / 2σ²)`, `σ` the median
/// off-diagonal distance and `A_ii = 0`.
pub fn spectral_embedding(d: &DistanceMatrix, k: usize) -> Result<Matrix, ClusterError> {
    embedding_from_values(d.values(), k)
}

fn embedding_from_values(d: &Matrix, k: usize) -> Result<Matrix, ClusterError> {
    let m = d.nrows();
    check_k(k, m)?;
    let mut off: Vec<f64> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| d[(i, j)]).collect();
    let sigma = median(&mut off).unwrap_or(0.0);
    if !(sigma > 0.0) {
        return Err(ClusterError::DegenerateAffinity);
    }
    let denom = 2.0 * sigma * sigma;
    let affinity = Matrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { (-d[(i, j)].powi(2) / denom).exp() });
    let inv_sqrt_deg: Vec<f64> = affinity
        .row_iter()
        .map(|r| {
            let deg = r.sum();
            if deg > 0.0 {
                1.0 / deg.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let normalized = Matrix::from_fn(m, m, |i, j| affinity[(i, j)] * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    let (_, vectors) = symmetric_eigen_desc(normalized);
    let mut embedding = vectors.columns(0, k).into_owned();
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(embedding)
}

/// Clusters a symmetric, zero-diagonal matrix of pairwise distances.
///
/// `embed_dim` only matters for [`ClusteringMethod::KMeansOnMdsEmbedding`].
/// [`ClusteringMethod::KMeansEuclidean`] is rejected because it needs
/// coordinates.
pub fn cluster_distances(
    d: &Matrix,
    method: ClusteringMethod,
    k: usize,
    embed_dim: Option<usize>,
    seed: u64,
) -> Result<ClusteringResult, ClusterError> {
    let m = d.nrows();
    check_k(k, m)?;
    if k == 1 {
        return Ok(ClusteringResult::single_cluster(m, method, seed));
    }
    let points = match method {
        ClusteringMethod::SpectralPrecomputed => embedding_from_values(d, k)?,
        ClusteringMethod::KMeansOnMdsEmbedding => {
            let dim = embed_dim.unwrap_or(k);
            let max = m.saturating_sub(1);
            if dim == 0 || dim > max {
                return Err(ClusterError::InvalidEmbedDim { dim, max });
            }
            let mds = classical_mds(d, dim);
            if mds.positive == 0 {
                return Err(ClusterError::DegenerateEmbedding);
            }
            mds.coords.columns(0, mds.positive).into_owned()
        }
        ClusteringMethod::KMeansEuclidean => {
            return Err(ClusterError::UnknownMethod("kmeans-euclidean needs coordinates, not distances".into()))
        }
    };
    let fit = kmeans(&points, k, seed, &KMeansOptions::default())?;
    Ok(ClusteringResult { labels: fit.labels, k, method, seed })
}

/// Spectral clustering on a precomputed distance matrix.
pub fn spectral_cluster(d: &DistanceMatrix, k: usize, seed: u64) -> Result<ClusteringResult, ClusterError> {
    cluster_distances(d.values(), ClusteringMethod::SpectralPrecomputed, k, None, seed)
}

/// k-means on the classical MDS coordinates of `d`; `embed_dim` defaults to `k`.
pub fn kmeans_on_distances(
    d: &DistanceMatrix,
    k: usize,
    embed_dim: Option<usize>,
    seed: u64,
) -> Result<ClusteringResult, ClusterError> {
    cluster_distances(d.values(), ClusteringMethod::KMeansOnMdsEmbedding, k, embed_dim, seed)
}

/// k-means directly on coordinates (one point per row).
pub fn kmeans_euclidean(points: &Matrix, k: usize, seed: u64) -> Result<ClusteringResult, ClusterError> {
    let method = ClusteringMethod::KMeansEuclidean;
    check_k(k, points.nrows())?;
    if k == 1 {
        return Ok(ClusteringResult::single_cluster(points.nrows(), method, seed));
    }
    let fit = kmeans(points, k, seed, &KMeansOptions::default())?;
    Ok(ClusteringResult { labels: fit.labels, k, method, seed })
}

/// Euclidean distances between the rows of `points`.
pub fn euclidean_distances(points: &Matrix) -> Matrix {
    pairwise_sq_distances(points).map(|v| v.max(0.0).sqrt())
}
