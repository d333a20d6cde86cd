//! Grassmann manifold primitives.
//!
//! A point on `Gr(n, r)` is stored as an `n × r` matrix with orthonormal
//! columns ([`Subspace`]); the equivalent projector `U Uᵀ` is available as
//! [`Projector`]. Distances are functions of the principal angles between
//! two subspaces, see [`GrassmannMetric`].

mod angles;
mod geodesic;
mod metric;
mod subspace;

pub use angles::{principal_angles, PrincipalAngles};
pub use geodesic::geodesic_interpolate;
pub use metric::{distance, GrassmannMetric};
pub use subspace::{Projector, Subspace, DEFAULT_RANK_TOL};

use thiserror::Error;

/// Singular values at or below this absolute floor count as zero.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Angles this close to `π/2` are treated as orthogonal.
pub const ORTHOGONAL_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannError {
    #[error("input matrix has no rows or no columns")]
    EmptyInput,
    #[error("every column is numerically zero (largest singular value {largest:e})")]
    AllColumnsZero { largest: f64 },
    #[error("ambient dimensions differ: {left} vs {right}")]
    AmbientDimMismatch { left: usize, right: usize },
    #[error("ranks differ: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("basis is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("matrix is not an orthogonal projector: {reason}")]
    NotProjector { reason: String },
    #[error("Martin distance diverges: principal angle {angle} is within {ORTHOGONAL_SLACK:e} of pi/2")]
    MartinDivergent { angle: f64 },
    #[error("geodesic is not unique: principal angle {angle} is within {ORTHOGONAL_SLACK:e} of pi/2")]
    NonUniqueGeodesic { angle: f64 },
    #[error("principal angle {angle} outside [0, pi/2] or list not sorted")]
    InvalidAngles { angle: f64 },
    #[error("interpolation parameter {t} outside [0, 1]")]
    ParameterOutOfRange { t: f64 },
    #[error("unknown Grassmann metric '{0}'")]
    UnknownMetric(String),
}
