use crate::linalg::symmetric_eigen_desc;
use crate::Matrix;

/// Classical (Torgerson) MDS coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MdsEmbedding {
    /// `M × dim`; columns past `positive` are zero.
    pub coords: Matrix,
    /// Leading eigenvalues of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Number of coordinates backed by a positive eigenvalue.
    pub positive: usize,
}

/// Embeds a distance matrix with `B = −½ J D⁽²⁾ J`, keeping the top `dim`
/// eigenpairs and zeroing the ones with nonpositive eigenvalue.
pub fn classical_mds(d: &Matrix, dim: usize) -> MdsEmbedding {
    let m = d.nrows();
    let mut b = d.map(|v| -0.5 * v * v);
    let row_means: Vec<f64> = b.row_iter().map(|r| r.mean()).collect();
    let grand = row_means.iter().sum::<f64>() / m as f64;
    for i in 0..m {
        for j in 0..m {
            // D is symmetric, so column means equal row means
            b[(i, j)] += grand - row_means[i] - row_means[j];
        }
    }
    let b = (&b + b.transpose()) * 0.5;
    let (values, vectors) = symmetric_eigen_desc(b);
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cutoff = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let dim = dim.min(m);
    let eigenvalues: Vec<f64> = values.iter().take(dim).copied().collect();
    let positive = eigenvalues.iter().take_while(|&&v| v > cutoff).count();
    let coords = Matrix::from_fn(m, dim, |r, c| {
        if c < positive {
            vectors[(r, c)] * eigenvalues[c].sqrt()
        } else {
            0.0
        }
    });
    MdsEmbedding { coords, eigenvalues, positive }
}
