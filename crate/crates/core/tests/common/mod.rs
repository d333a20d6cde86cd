//! Synthetic data and independent reference implementations.
#![allow(dead_code)]

use mgm_core::io::{ClassLabels, ExpressionMatrix};
use mgm_core::{Matrix, Subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly distributed point of Gr(n, r), via the span of a Gaussian matrix.
pub fn random_subspace(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Subspace {
    Subspace::span_of(&gaussian_matrix(rng, n, r)).expect("full rank almost surely")
}

/// Random orthogonal matrix from a Gaussian QR.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian_matrix(rng, n, n).qr().q()
}

/// Isotropic unit-variance Gaussian blobs around `centers` (one row per
/// class, padded with zeros to `dim`), shifted by `offset`.
pub fn blobs_around(seed: u64, per_class: usize, centers: &Matrix, dim: usize, offset: f64) -> (Matrix, Vec<usize>) {
    let mut r = rng(seed);
    let m = per_class * centers.nrows();
    let labels: Vec<usize> = (0..m).map(|i| i / per_class).collect();
    let values = Matrix::from_fn(m, dim, |i, f| {
        let center = if f < centers.ncols() { centers[(labels[i], f)] } else { 0.0 };
        let z: f64 = StandardNormal.sample(&mut r);
        offset + center + z
    });
    (values, labels)
}

/// Blobs whose centers sit on a line, consecutive centers `separation` apart.
pub fn collinear_blobs(seed: u64, per_class: usize, classes: usize, dim: usize, separation: f64, offset: f64) -> (Matrix, Vec<usize>) {
    let centers = Matrix::from_fn(classes, 1, |c, _| c as f64 * separation);
    blobs_around(seed, per_class, &centers, dim, offset)
}

/// Blobs whose centers are pairwise `separation` apart (a scaled simplex).
pub fn gaussian_blobs(seed: u64, per_class: usize, classes: usize, dim: usize, separation: f64, offset: f64) -> (Matrix, Vec<usize>) {
    assert!(classes <= dim);
    // e_i / sqrt(2) has pairwise distance 1
    let scale = separation / std::f64::consts::SQRT_2;
    let centers = Matrix::from_fn(classes, classes, |c, f| if c == f { scale } else { 0.0 });
    blobs_around(seed, per_class, &centers, dim, offset)
}

pub fn expression(values: Matrix, labels: &[usize]) -> ExpressionMatrix {
    let names: Vec<String> = labels.iter().map(|l| format!("class{l}")).collect();
    ExpressionMatrix::new(values).unwrap().with_labels(ClassLabels::from_names(&names)).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..k)).collect()
}

/// Principal angles by repeated power iteration on `XᵀY` with deflation.
pub fn principal_angles_oracle(x: &Matrix, y: &Matrix) -> Vec<f64> {
    let mut c = x.transpose() * y;
    let count = c.nrows().min(c.ncols());
    let mut cosines = Vec::with_capacity(count);
    for step in 0..count {
        // deterministic, generic start vector
        let mut v = nalgebra::DVector::from_fn(c.ncols(), |i, _| 1.0 + 0.37 * (i + step) as f64);
        v /= v.norm();
        let mut sigma = 0.0;
        for _ in 0..20_000 {
            let u = &c * &v;
            let mut w = c.transpose() * &u;
            let norm = w.norm();
            if norm == 0.0 {
                sigma = 0.0;
                break;
            }
            w /= norm;
            let next = (&c * &w).norm();
            let delta = (w.clone() - &v).norm();
            v = w;
            sigma = next;
            if delta < 1e-15 {
                break;
            }
        }
        let u_raw = &c * &v;
        let u = if sigma > 0.0 { u_raw / sigma } else { u_raw };
        c -= sigma * &u * v.transpose();
        cosines.push(sigma.min(1.0));
    }
    cosines.sort_by(|a, b| b.total_cmp(a));
    cosines.into_iter().map(f64::acos).collect()
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Best matched fraction over every injective mapping of clusters to
/// classes, by enumeration.
pub fn accuracy_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let size = kp.max(kt);
    let mut perms = Vec::new();
    permutations(&mut (0..size).collect(), 0, &mut perms);
    let best = perms
        .iter()
        .map(|p| pred.iter().zip(truth).filter(|&(&a, &b)| p[a] == b).count())
        .max()
        .unwrap();
    best as f64 / pred.len() as f64
}

/// ARI from explicit enumeration of unordered pairs.
pub fn ari_oracle(pred: &[usize], truth: &[usize]) -> f64 {
    let m = pred.len();
    let (mut both, mut same_pred, mut same_truth) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in i + 1..m {
            let p = pred[i] == pred[j];
            let t = truth[i] == truth[j];
            both += f64::from(u8::from(p && t));
            same_pred += f64::from(u8::from(p));
            same_truth += f64::from(u8::from(t));
        }
    }
    let pairs = (m * (m - 1) / 2) as f64;
    let expected = same_pred * same_truth / pairs;
    let max = 0.5 * (same_pred + same_truth);
    if max == expected {
        return if pred_equiv(pred, truth) { 1.0 } else { 0.0 };
    }
    (both - expected) / (max - expected)
}

fn pred_equiv(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// Optimal 1-d k-means within-cluster sum of squares by dynamic programming
/// over sorted points.
pub fn kmeans_1d_optimum(points: &[f64], k: usize) -> f64 {
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let mut pre = vec![0.0; n + 1];
    let mut pre2 = vec![0.0; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + xs[i];
        pre2[i + 1] = pre2[i] + xs[i] * xs[i];
    }
    let sse = |a: usize, b: usize| {
        let len = (b - a) as f64;
        let s = pre[b] - pre[a];
        (pre2[b] - pre2[a]) - s * s / len
    };
    let mut dp = vec![vec![f64::INFINITY; n + 1]; k + 1];
    dp[0][0] = 0.0;
    for c in 1..=k {
        for b in c..=n {
            for a in (c - 1)..b {
                let v = dp[c - 1][a] + sse(a, b);
                if v < dp[c][b] {
                    dp[c][b] = v;
                }
            }
        }
    }
    dp[k][n]
}

/// Within-cluster sum of squares of a 1-d labelling.
pub fn sse_1d(points: &[f64], labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<f64> = points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| *p).collect();
        if members.is_empty() {
            continue;
        }
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        total += members.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    total
}
