//! Lloyd's k-means with k-means++ seeding and independent restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_k, ClusterError};
use crate::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative drop in inertia falls below this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 300, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    /// `k × d`, one centroid per row.
    pub centroids: Matrix,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    /// Index of the winning restart.
    pub restart: usize,
}

fn sq_dist(points: &Matrix, i: usize, centroids: &Matrix, c: usize) -> f64 {
    points.row(i).iter().zip(centroids.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plus_plus_init(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let (m, d) = points.shape();
    let mut centroids = Matrix::zeros(k, d);
    let first = rng.random_range(0..m);
    centroids.row_mut(0).copy_from(&points.row(first));
    let mut closest: Vec<f64> = (0..m).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = m - 1;
            for (i, &w) in closest.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).copy_from(&points.row(pick));
        for (i, best) in closest.iter_mut().enumerate() {
            *best = best.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

fn assign(points: &Matrix, centroids: &Matrix, labels: &mut [usize]) -> (f64, Vec<f64>) {
    let k = centroids.nrows();
    let mut inertia = 0.0;
    let mut own = vec![0.0; points.nrows()];
    for i in 0..points.nrows() {
        let mut best = (f64::INFINITY, 0usize);
        for c in 0..k {
            let d = sq_dist(points, i, centroids, c);
            if d < best.0 {
                best = (d, c);
            }
        }
        labels[i] = best.1;
        own[i] = best.0;
        inertia += best.0;
    }
    (inertia, own)
}

fn single_run(points: &Matrix, k: usize, opts: &KMeansOptions, rng: &mut ChaCha8Rng) -> (Vec<usize>, Matrix, f64) {
    let (m, d) = points.shape();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![0usize; m];
    let (mut inertia, mut own) = assign(points, &centroids, &mut labels);
    for _ in 0..opts.max_iter {
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..m {
            let c = labels[i];
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        let mut taken = vec![false; m];
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = centroids.row_mut(c);
                row.copy_from(&(sums.row(c) / counts[c] as f64));
            } else {
                // reseed an empty cluster at the point farthest from its centroid
                let far = (0..m)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| own[a].total_cmp(&own[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                centroids.row_mut(c).copy_from(&points.row(far));
            }
        }
        let previous = inertia;
        let (next, next_own) = assign(points, &centroids, &mut labels);
        inertia = next;
        own = next_own;
        let drop = previous - inertia;
        if drop.abs() <= opts.tol * previous.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (labels, centroids, inertia)
}

/// k-means over the rows of `points`.
///
/// Restart `r` draws from a ChaCha8 stream `r` keyed by `seed`; restarts run
/// in parallel and the lowest `(inertia, r)` wins, so the result does not
/// depend on scheduling.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansFit, ClusterError> {
    let m = points.nrows();
    check_k(k, m)?;
    if points.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    let restarts = opts.restarts.max(1);
    let runs: Vec<(Vec<usize>, Matrix, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            single_run(points, k, opts, &mut rng)
        })
        .collect();
    let (restart, (labels, centroids, inertia)) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.2.total_cmp(&b.2).then(ia.cmp(ib)))
        .expect("at least one restart");
    Ok(KMeansFit { labels, centroids, inertia, restart })
}
