//! Small dense helpers shared by the embedding and clustering code.

use nalgebra::SymmetricEigen;

use crate::Matrix;

/// Eigenpairs of a symmetric matrix, eigenvalues descending, with
/// [`fix_column_signs`] applied to the eigenvectors.
pub(crate) fn symmetric_eigen_desc(m: Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    fix_column_signs(&mut vectors);
    (values, vectors)
}

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
pub(crate) fn fix_column_signs(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Squared Euclidean distances between the rows of `x`.
pub(crate) fn pairwise_sq_distances(x: &Matrix) -> Matrix {
    use rayon::prelude::*;
    let m = x.nrows();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    x.row(a)
                        .iter()
                        .zip(x.row(b).iter())
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum()
                })
                .collect()
        })
        .collect();
    Matrix::from_fn(m, m, |i, j| rows[i][j])
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_signed() {
        let m = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let (vals, vecs) = symmetric_eigen_desc(m.clone());
        assert!((vals[0] - 5.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12 && (vals[2] - 1.0).abs() < 1e-12);
        for c in 0..3 {
            let col = vecs.column(c);
            let lead = col.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(lead > 0.0);
            let resid = &m * col - col * vals[c];
            assert!(resid.norm() < 1e-12);
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
