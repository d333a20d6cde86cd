use std::cmp::Ordering;

use nalgebra::SVD;

use super::{GrassmannError, ZERO_FLOOR};
use crate::Matrix;

/// Default relative threshold for the numerical rank of a set of columns.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const ORTHONORMAL_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
const IDEMPOTENCE_TOL: f64 = 1e-8;

/// A linear subspace of `R^n`, held as an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps a basis after checking `‖UᵀU − I‖_F ≤ 1e-10`.
    pub fn from_orthonormal(basis: Matrix) -> Result<Self, GrassmannError> {
        if basis.nrows() == 0 || basis.ncols() == 0 {
            return Err(GrassmannError::EmptyInput);
        }
        if basis.ncols() > basis.nrows() {
            return Err(GrassmannError::NotOrthonormal { residual: f64::INFINITY });
        }
        let gram = basis.transpose() * &basis;
        let residual = (gram - Matrix::identity(basis.ncols(), basis.ncols())).norm();
        if !(residual <= ORTHONORMAL_TOL) {
            return Err(GrassmannError::NotOrthonormal { residual });
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis for the span of `columns`.
    ///
    /// The rank is the number of singular values above `tol` times the
    /// largest one, so dependent columns lower the rank instead of failing.
    pub fn orthonormalize(columns: &Matrix, tol: f64) -> Result<Self, GrassmannError> {
        let (n, k) = columns.shape();
        if n == 0 || k == 0 {
            return Err(GrassmannError::EmptyInput);
        }
        let svd = SVD::new(columns.clone(), true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
        let largest = sv[order[0]];
        if !(largest > ZERO_FLOOR) {
            return Err(GrassmannError::AllColumnsZero { largest });
        }
        let threshold = tol * largest;
        let rank = order.iter().take_while(|&&i| sv[i] > threshold).count();
        let basis = Matrix::from_fn(n, rank, |row, col| u[(row, order[col])]);
        Ok(Self { basis })
    }

    /// `orthonormalize` with [`DEFAULT_RANK_TOL`].
    pub fn span_of(columns: &Matrix) -> Result<Self, GrassmannError> {
        Self::orthonormalize(columns, DEFAULT_RANK_TOL)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    pub fn to_projector(&self) -> Projector {
        Projector::from_subspace(self)
    }

    /// Image of the subspace under an `n × n` orthogonal map.
    pub fn transformed(&self, q: &Matrix) -> Result<Self, GrassmannError> {
        if q.ncols() != self.ambient_dim() {
            return Err(GrassmannError::AmbientDimMismatch {
                left: q.ncols(),
                right: self.ambient_dim(),
            });
        }
        Self::from_orthonormal(q * &self.basis)
    }

    /// Total order on (rank, basis entries); used to make pairwise
    /// computations independent of argument order.
    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .rank()
            .cmp(&self.rank())
            .then_with(|| {
                self.basis
                    .iter()
                    .zip(other.basis.iter())
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

/// Orthogonal projector `U Uᵀ` onto a subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: Matrix,
}

impl Projector {
    pub fn from_subspace(s: &Subspace) -> Self {
        let matrix = s.basis() * s.basis().transpose();
        Self { matrix }
    }

    /// Validates symmetry, idempotence and integral trace.
    pub fn from_matrix(matrix: Matrix) -> Result<Self, GrassmannError> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(GrassmannError::NotProjector { reason: "not a nonempty square matrix".into() });
        }
        let asym = (&matrix - matrix.transpose()).norm();
        if !(asym <= SYMMETRY_TOL) {
            return Err(GrassmannError::NotProjector { reason: format!("asymmetry {asym:e}") });
        }
        let idem = (&matrix * &matrix - &matrix).norm();
        if !(idem <= IDEMPOTENCE_TOL) {
            return Err(GrassmannError::NotProjector { reason: format!("idempotence residual {idem:e}") });
        }
        let trace = matrix.trace();
        if (trace - trace.round()).abs() > IDEMPOTENCE_TOL {
            return Err(GrassmannError::NotProjector { reason: format!("trace {trace} not integral") });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.matrix.trace().round().max(0.0) as usize
    }

    /// Orthonormal basis of the range.
    pub fn column_space(&self, tol: f64) -> Result<Subspace, GrassmannError> {
        Subspace::orthonormalize(&self.matrix, tol)
    }

    /// Frobenius norm of the difference of two projectors.
    pub fn frobenius_distance(&self, other: &Projector) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn e(n: usize, i: usize) -> Matrix {
        Matrix::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    /// Classical Gram–Schmidt with a relative drop threshold.
    fn gram_schmidt(columns: &Matrix, tol: f64) -> Matrix {
        let mut kept: Vec<nalgebra::DVector<f64>> = Vec::new();
        let scale = columns.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in columns.column_iter() {
            let mut v = c.clone_owned();
            for _ in 0..2 {
                for q in &kept {
                    let proj = q.dot(&v);
                    v -= q * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 * scale.max(tol) {
                kept.push(v / norm);
            }
        }
        Matrix::from_columns(&kept)
    }

    #[test]
    fn duplicate_column_has_rank_one() {
        let cols = Matrix::from_columns(&[e(3, 0).column(0), e(3, 0).column(0)]);
        let s = Subspace::span_of(&cols).unwrap();
        assert_eq!(s.rank(), 1);
        let p = s.to_projector();
        assert!(p.frobenius_distance(&Subspace::span_of(&e(3, 0)).unwrap().to_projector()) < 1e-12);
    }

    #[test]
    fn identity_spans_everything() {
        let s = Subspace::span_of(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(s.rank(), 3);
        assert!((s.to_projector().matrix() - Matrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn dependent_third_column_matches_gram_schmidt() {
        let mut cols = Matrix::from_row_slice(
            4,
            3,
            &[0.3, -1.2, 0.0, 0.8, 0.5, 0.0, -0.4, 0.9, 0.0, 1.1, 0.2, 0.0],
        );
        for r in 0..4 {
            cols[(r, 2)] = cols[(r, 0)] + cols[(r, 1)];
        }
        let s = Subspace::span_of(&cols).unwrap();
        assert_eq!(s.rank(), 2);
        let oracle = gram_schmidt(&cols, 1e-10);
        assert_eq!(oracle.ncols(), 2);
        let po = &oracle * oracle.transpose();
        assert!((s.to_projector().matrix() - po).norm() < 1e-10);
    }

    #[test]
    fn all_zero_columns_error() {
        let err = Subspace::span_of(&Matrix::zeros(3, 2)).unwrap_err();
        assert!(matches!(err, GrassmannError::AllColumnsZero { .. }));
    }

    #[test]
    fn empty_input_error() {
        assert_eq!(Subspace::span_of(&Matrix::zeros(3, 0)).unwrap_err(), GrassmannError::EmptyInput);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let b = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(Subspace::from_orthonormal(b), Err(GrassmannError::NotOrthonormal { .. })));
    }

    #[test]
    fn projector_examples() {
        let p = Subspace::span_of(&e(2, 0)).unwrap().to_projector();
        assert!((p.matrix() - Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);

        let full = Subspace::span_of(&Matrix::identity(2, 2)).unwrap().to_projector();
        assert!((full.matrix() - Matrix::identity(2, 2)).norm() < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let diag = Subspace::from_orthonormal(Matrix::from_row_slice(2, 1, &[h, h])).unwrap();
        let expected = Matrix::from_element(2, 2, 0.5);
        assert!((diag.to_projector().matrix() - expected).norm() < 1e-15);
        assert_eq!(diag.to_projector().rank(), 1);
    }

    #[test]
    fn projector_is_basis_independent() {
        let cols = Matrix::from_row_slice(4, 2, &[1.0, 0.2, 0.3, -0.7, 0.0, 1.5, 2.0, 0.1]);
        let s = Subspace::span_of(&cols).unwrap();
        let (c, sn) = (0.4f64.cos(), 0.4f64.sin());
        let r = Matrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
        let rotated = Subspace::from_orthonormal(s.basis() * r).unwrap();
        assert!(s.to_projector().frobenius_distance(&rotated.to_projector()) < 1e-10);
    }

    #[test]
    fn projector_invariants_and_round_trip() {
        let cols = Matrix::from_row_slice(5, 3, &[
            1.0, 0.0, 2.0, 0.5, 1.0, -1.0, 0.0, 3.0, 0.4, 2.0, 0.1, 0.0, -1.0, 1.0, 1.0,
        ]);
        let s = Subspace::span_of(&cols).unwrap();
        let p = Projector::from_matrix(s.to_projector().matrix().clone()).unwrap();
        assert_eq!(p.rank(), 3);
        assert_close(p.matrix().trace(), 3.0, 1e-8);
        let back = p.column_space(DEFAULT_RANK_TOL).unwrap();
        assert_eq!(back.rank(), 3);
        assert!(back.to_projector().frobenius_distance(&p) < 1e-10);
    }

    #[test]
    fn non_projector_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Projector::from_matrix(m).is_err());
        assert!(Projector::from_matrix(Matrix::from_element(2, 2, 0.7)).is_err());
    }
}
