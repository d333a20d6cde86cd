use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use nalgebra::SVD;

use super::{GrassmannError, Subspace};
use crate::Matrix;

/// Principal angles `θ₁ ≤ … ≤ θ_m` between two subspaces, `m = min(r_x, r_y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalAngles(Vec<f64>);

impl PrincipalAngles {
    /// Accepts a nondecreasing list inside `[0, π/2]`.
    pub fn new(angles: Vec<f64>) -> Result<Self, GrassmannError> {
        if angles.is_empty() {
            return Err(GrassmannError::EmptyInput);
        }
        for (i, &a) in angles.iter().enumerate() {
            let in_range = (0.0..=FRAC_PI_2).contains(&a);
            let sorted = i == 0 || angles[i - 1] <= a;
            if !in_range || !sorted {
                return Err(GrassmannError::InvalidAngles { angle: a });
            }
        }
        Ok(Self(angles))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }
}

fn sorted_singular_values(m: Matrix, descending: bool) -> Vec<f64> {
    let mut sv: Vec<f64> = SVD::new(m, false, false).singular_values.iter().copied().collect();
    if descending {
        sv.sort_by(|a, b| b.total_cmp(a));
    } else {
        sv.sort_by(|a, b| a.total_cmp(b));
    }
    sv
}

/// Principal angles from the singular values of `Xᵀ Y`.
///
/// Cosines are clamped to `[0, 1]` before `arccos`. Angles below `π/4` are
/// taken from the sines instead (singular values of `Y − X Xᵀ Y`), where
/// `arccos` near 1 would lose about half the significant digits.
///
/// The result is bitwise identical for `(x, y)` and `(y, x)`.
pub fn principal_angles(x: &Subspace, y: &Subspace) -> Result<PrincipalAngles, GrassmannError> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(GrassmannError::AmbientDimMismatch {
            left: x.ambient_dim(),
            right: y.ambient_dim(),
        });
    }
    // `big` has rank >= `small`; equal ranks are ordered by basis contents.
    let (big, small) = match x.canonical_cmp(y) {
        Ordering::Greater => (y, x),
        _ => (x, y),
    };
    let m = small.rank();
    let cross = big.basis().transpose() * small.basis();
    let cosines = sorted_singular_values(cross.clone(), true);
    let residual = small.basis() - big.basis() * cross;
    let sines = sorted_singular_values(residual, false);

    let mut angles: Vec<f64> = (0..m)
        .map(|i| {
            let c = cosines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let s = sines.get(i).copied().unwrap_or(1.0).clamp(0.0, 1.0);
            if c * c > 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .map(|a| a.clamp(0.0, FRAC_PI_2))
        .collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    Ok(PrincipalAngles(angles))
}
