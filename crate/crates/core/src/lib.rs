//! Multiscale Grassmann manifold (MGM) representations of expression data.
//!
//! A samples-by-features matrix is reduced to one embedding per neighborhood
//! scale, every sample's multiscale feature vectors are collected into a
//! subspace (a point on the Grassmann manifold `Gr(n, p)`), and pairwise
//! subspace distances feed clustering and external evaluation.
//!
//! Module map:
//! - [`grassmann`]: subspaces, projectors, principal angles, the five
//!   angle-based distances and geodesic interpolation.
//! - [`scales`]: power-law sampling of integer neighborhood scales.
//! - [`mdr`]: multiscale dimension reduction backends.
//! - [`pipeline`]: per-sample aggregation, subspace construction and the
//!   parallel distance matrix.
//! - [`cluster`]: clustering on precomputed distances and evaluation metrics.
//! - [`io`]: ingestion, preprocessing, configuration, experiments and exports.

pub mod cluster;
pub mod error;
pub mod grassmann;
pub mod io;
mod linalg;
pub mod mdr;
pub mod pipeline;
pub mod scales;

pub use error::{Error, ErrorKind, Stage};
pub use grassmann::{GrassmannMetric, PrincipalAngles, Projector, Subspace};
pub use scales::{ScaleSamplingSpec, ScaleSet};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
