use nalgebra::{DVector, SVD};

use super::{GrassmannError, Subspace, ORTHOGONAL_SLACK};
use crate::Matrix;
use std::f64::consts::FRAC_PI_2;

/// Point at parameter `t` on the minimizing geodesic from `x` to `y`.
///
/// With `Xᵀ Y = A Σ Bᵀ`, the principal vectors `u_i = X a_i`, `v_i = Y b_i`
/// span planes in which the geodesic rotates `u_i` towards `v_i` by `t θ_i`.
/// Requires equal ranks and every principal angle strictly below `π/2`.
pub fn geodesic_interpolate(x: &Subspace, y: &Subspace, t: f64) -> Result<Subspace, GrassmannError> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(GrassmannError::AmbientDimMismatch {
            left: x.ambient_dim(),
            right: y.ambient_dim(),
        });
    }
    if x.rank() != y.rank() {
        return Err(GrassmannError::RankMismatch { left: x.rank(), right: y.rank() });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(GrassmannError::ParameterOutOfRange { t });
    }
    let svd = SVD::new(x.basis().transpose() * y.basis(), true, true);
    let a = svd.u.expect("requested");
    let b = svd.v_t.expect("requested").transpose();
    let u = x.basis() * a;
    let v = y.basis() * b;

    let n = x.ambient_dim();
    let r = x.rank();
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(r);
    for i in 0..r {
        let ui = u.column(i).clone_owned();
        let vi = v.column(i).clone_owned();
        let c = ui.dot(&vi);
        let w = &vi - &ui * c;
        let s = w.norm();
        let theta = s.atan2(c);
        if theta >= FRAC_PI_2 - ORTHOGONAL_SLACK {
            return Err(GrassmannError::NonUniqueGeodesic { angle: theta });
        }
        let col = if s > 1e-15 {
            &ui * (t * theta).cos() + (&w / s) * (t * theta).sin()
        } else {
            ui
        };
        columns.push(col);
    }
    let basis = if columns.is_empty() { Matrix::zeros(n, 0) } else { Matrix::from_columns(&columns) };
    Subspace::from_orthonormal(basis)
}
