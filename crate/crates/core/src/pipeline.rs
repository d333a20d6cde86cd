//! Aggregation of multiscale features into per-sample subspaces and the
//! pairwise Grassmann distance matrix.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Stage};
use crate::grassmann::{distance, GrassmannError, GrassmannMetric, Subspace, DEFAULT_RANK_TOL};
use crate::mdr::{build_stack, pca_reduce, EmbeddingStack, MdrBackendSpec};
use crate::scales::{sample_scales, ScaleSamplingSpec};
use crate::Matrix;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("cell index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cell {index}: {source}")]
    Cell {
        index: usize,
        #[source]
        source: GrassmannError,
    },
    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: GrassmannError,
    },
    #[error("need at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),
}

/// Every sample as a point on `Gr(n, r_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSubspaceSet {
    points: Vec<Subspace>,
    nominal_rank: usize,
    embedding_dim: usize,
}

impl CellSubspaceSet {
    pub fn new(points: Vec<Subspace>, nominal_rank: usize) -> Result<Self, PipelineError> {
        let Some(first) = points.first() else {
            return Err(PipelineError::TooFewCells(0));
        };
        let embedding_dim = first.ambient_dim();
        for (index, p) in points.iter().enumerate() {
            if p.ambient_dim() != embedding_dim {
                return Err(PipelineError::Cell {
                    index,
                    source: GrassmannError::AmbientDimMismatch { left: embedding_dim, right: p.ambient_dim() },
                });
            }
            if p.rank() > nominal_rank {
                return Err(PipelineError::Cell {
                    index,
                    source: GrassmannError::RankMismatch { left: nominal_rank, right: p.rank() },
                });
            }
        }
        Ok(Self { points, nominal_rank, embedding_dim })
    }

    pub fn points(&self) -> &[Subspace] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `p`, the number of scales aggregated per cell.
    pub fn nominal_rank(&self) -> usize {
        self.nominal_rank
    }

    /// `n`.
    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// Cells whose subspace rank fell below `p`.
    pub fn rank_reduced_count(&self) -> usize {
        self.points.iter().filter(|s| s.rank() < self.nominal_rank).count()
    }

    pub fn rank_range(&self) -> (usize, usize) {
        let ranks = self.points.iter().map(Subspace::rank);
        let min = ranks.clone().min().unwrap_or(0);
        (min, ranks.max().unwrap_or(0))
    }

    /// Cells reordered: point `i` of the result is point `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
            nominal_rank: self.nominal_rank,
            embedding_dim: self.embedding_dim,
        }
    }
}

/// Symmetric, nonnegative, zero-diagonal matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    metric: GrassmannMetric,
    values: Matrix,
}

impl DistanceMatrix {
    pub fn new(values: Matrix, metric: GrassmannMetric) -> Result<Self, PipelineError> {
        if !values.is_square() {
            return Err(PipelineError::InvalidDistanceMatrix(format!("shape {:?}", values.shape())));
        }
        let m = values.nrows();
        for i in 0..m {
            if values[(i, i)] != 0.0 {
                return Err(PipelineError::InvalidDistanceMatrix(format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..m {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(PipelineError::InvalidDistanceMatrix(format!("entry ({i}, {j}) = {v}")));
                }
                if (v - values[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(PipelineError::InvalidDistanceMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { metric, values })
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn metric(&self) -> GrassmannMetric {
        self.metric
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Strict upper triangle, row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let m = self.size();
        (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).map(|(i, j)| self.values[(i, j)]).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let values = Matrix::from_fn(perm.len(), perm.len(), |i, j| self.values[(perm[i], perm[j])]);
        Self { metric: self.metric, values }
    }
}

/// `Z_j`: column `i` is row `cell_index` of embedding `i`.
pub fn aggregate_features(stack: &EmbeddingStack, cell_index: usize) -> Result<Matrix, PipelineError> {
    let len = stack.sample_count();
    if cell_index >= len {
        return Err(PipelineError::IndexOutOfRange { index: cell_index, len });
    }
    let n = stack.embedding_dim();
    let e = stack.embeddings();
    Ok(Matrix::from_fn(n, e.len(), |r, c| e[c][(cell_index, r)]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceOptions {
    /// Scale every nonzero column of `Z_j` to unit norm first.
    pub normalize_columns: bool,
    /// Relative singular-value threshold for the numerical rank.
    pub rank_tol: f64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self { normalize_columns: false, rank_tol: DEFAULT_RANK_TOL }
    }
}

/// `G_j = span(Z_j)` for every cell.
pub fn build_subspaces(stack: &EmbeddingStack, opts: SubspaceOptions) -> Result<CellSubspaceSet, PipelineError> {
    let p = stack.len();
    if stack.embedding_dim() < p {
        log::warn!(
            "embedding dimension {} is below the number of scales {p}; every subspace will be rank deficient",
            stack.embedding_dim()
        );
    }
    let points = (0..stack.sample_count())
        .into_par_iter()
        .map(|j| {
            let mut z = aggregate_features(stack, j)?;
            if opts.normalize_columns {
                for mut col in z.column_iter_mut() {
                    let norm = col.norm();
                    if norm > 0.0 {
                        col /= norm;
                    }
                }
            }
            Subspace::orthonormalize(&z, opts.rank_tol).map_err(|source| PipelineError::Cell { index: j, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    CellSubspaceSet::new(points, p)
}

/// Pairwise distances, computed in parallel over rows of the upper triangle.
///
/// Each entry is a pure function of its pair, so the result does not depend
/// on the number of worker threads. The first failing pair in row-major
/// order is reported.
pub fn distance_matrix(cells: &CellSubspaceSet, metric: GrassmannMetric) -> Result<DistanceMatrix, PipelineError> {
    let m = cells.len();
    if m < 2 {
        return Err(PipelineError::TooFewCells(m));
    }
    let pts = cells.points();
    let rows: Vec<Result<Vec<f64>, PipelineError>> = (0..m)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..m)
                .map(|j| distance(&pts[i], &pts[j], metric).map_err(|source| PipelineError::Pair { i, j, source }))
                .collect()
        })
        .collect();
    let mut values = Matrix::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, d) in row?.into_iter().enumerate() {
            let j = i + 1 + offset;
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    Ok(DistanceMatrix { metric, values })
}

/// Parameters of the representation itself (everything up to `D`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgmConfig {
    pub scales: ScaleSamplingSpec,
    /// Optional PCA reduction applied before the MDR backend.
    pub pca_dim: Option<usize>,
    pub embedding: MdrBackendSpec,
    pub metric: GrassmannMetric,
    pub subspace: SubspaceOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// What a run actually did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub requested_scales: usize,
    pub scales: Vec<usize>,
    /// Distinct scales after deduplication.
    pub p: usize,
    pub embedding_dim: usize,
    pub pca_dim: Option<usize>,
    pub embedding_method: String,
    pub metric: GrassmannMetric,
    pub cells: usize,
    pub rank_reduced_cells: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    pub timings: Vec<StageTiming>,
}

#[derive(Clone, Debug)]
pub struct MgmOutput {
    pub stack: EmbeddingStack,
    pub cells: CellSubspaceSet,
    pub distances: DistanceMatrix,
    pub report: RunReport,
}

/// Scale sampling, optional PCA, MDR stack, subspaces and `D`.
pub fn run_mgm(x: &Matrix, cfg: &MgmConfig, seed: u64) -> Result<MgmOutput, Error> {
    let mut timings = Vec::new();
    let mut timed = |stage: Stage, start: Instant| {
        timings.push(StageTiming { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64() });
    };

    let t = Instant::now();
    let scales = sample_scales(&cfg.scales).map_err(|e| Error::at(Stage::ScaleSampling, e))?;
    timed(Stage::ScaleSampling, t);

    let t = Instant::now();
    let reduced;
    let input = match cfg.pca_dim {
        Some(dim) => {
            reduced = pca_reduce(x, dim).map_err(|e| Error::at(Stage::Pca, e))?;
            &reduced
        }
        None => x,
    };
    timed(Stage::Pca, t);

    let t = Instant::now();
    let stack = build_stack(input, &scales, &cfg.embedding, seed).map_err(|e| Error::at(Stage::Embedding, e))?;
    timed(Stage::Embedding, t);

    let t = Instant::now();
    let cells = build_subspaces(&stack, cfg.subspace).map_err(|e| Error::at(Stage::Subspaces, e))?;
    timed(Stage::Subspaces, t);

    let t = Instant::now();
    let distances = distance_matrix(&cells, cfg.metric).map_err(|e| Error::at(Stage::Distances, e))?;
    timed(Stage::Distances, t);

    let (min_rank, max_rank) = cells.rank_range();
    let report = RunReport {
        seed,
        requested_scales: cfg.scales.count,
        scales: scales.as_slice().to_vec(),
        p: scales.len(),
        embedding_dim: stack.embedding_dim(),
        pca_dim: cfg.pca_dim,
        embedding_method: cfg.embedding.method.to_string(),
        metric: cfg.metric,
        cells: cells.len(),
        rank_reduced_cells: cells.rank_reduced_count(),
        min_rank,
        max_rank,
        timings,
    };
    if report.rank_reduced_cells > 0 {
        log::warn!("{} of {} cells have subspace rank below p = {}", report.rank_reduced_cells, report.cells, report.p);
    }
    Ok(MgmOutput { stack, cells, distances, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(embeddings: Vec<Matrix>) -> EmbeddingStack {
        let scales = (0..embeddings.len()).map(|i| i + 2).collect();
        EmbeddingStack::new(scales, embeddings, 0).unwrap()
    }

    #[test]
    fn single_scale_column_is_the_row() {
        let e = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let z = aggregate_features(&stack(vec![e]), 1).unwrap();
        assert_eq!(z, Matrix::from_column_slice(3, 1, &[4.0, 5.0, 6.0]));
    }

    #[test]
    fn index_bookkeeping() {
        let es: Vec<Matrix> = (0..3)
            .map(|s| Matrix::from_fn(5, 4, |r, c| (100 * s + 10 * r + c) as f64))
            .collect();
        let st = stack(es);
        let z = aggregate_features(&st, 2).unwrap();
        assert_eq!(z.shape(), (4, 3));
        for i in 0..3 {
            for r in 0..4 {
                assert_eq!(z[(r, i)], (100 * i + 20 + r) as f64);
            }
        }
        assert!(matches!(aggregate_features(&st, 5), Err(PipelineError::IndexOutOfRange { index: 5, len: 5 })));
    }

    #[test]
    fn identical_scales_give_rank_one() {
        let e = Matrix::from_fn(4, 3, |r, c| 1.0 + r as f64 * 0.5 + c as f64);
        let st = stack(vec![e.clone(), e.clone(), e]);
        let z = aggregate_features(&st, 0).unwrap();
        assert_eq!(Subspace::span_of(&z).unwrap().rank(), 1);
        let cells = build_subspaces(&st, SubspaceOptions::default()).unwrap();
        assert!(cells.points().iter().all(|s| s.rank() == 1));
        assert_eq!(cells.rank_reduced_count(), 4);
    }

    #[test]
    fn dependent_columns_drop_rank() {
        // Z = [e1, e2, e1 + e2] in R^4 for the only cell
        let rows = |v: [f64; 4]| Matrix::from_row_slice(1, 4, &v);
        let st = stack(vec![rows([1.0, 0.0, 0.0, 0.0]), rows([0.0, 1.0, 0.0, 0.0]), rows([1.0, 1.0, 0.0, 0.0])]);
        let cells = build_subspaces(&st, SubspaceOptions::default()).unwrap();
        let g = &cells.points()[0];
        assert_eq!(g.rank(), 2);
        let mut expected = Matrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        expected[(1, 1)] = 1.0;
        assert!((g.to_projector().matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn vanishing_cell_is_an_error() {
        let mut e = Matrix::from_element(3, 4, 1.0);
        e.row_mut(1).fill(0.0);
        let st = stack(vec![e.clone(), e]);
        assert!(matches!(
            build_subspaces(&st, SubspaceOptions::default()),
            Err(PipelineError::Cell { index: 1, source: GrassmannError::AllColumnsZero { .. } })
        ));
    }

    #[test]
    fn distance_matrix_matches_scalar_calls() {
        let pts: Vec<Subspace> = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.2, 0.3, 1.0]]
            .iter()
            .map(|v| Subspace::span_of(&Matrix::from_column_slice(3, 1, v)).unwrap())
            .collect();
        let cells = CellSubspaceSet::new(pts.clone(), 1).unwrap();
        for metric in GrassmannMetric::ALL {
            let d = distance_matrix(&cells, metric).unwrap();
            for i in 0..3 {
                assert_eq!(d.get(i, i), 0.0);
                for j in 0..3 {
                    if i != j {
                        let direct = distance(&pts[i], &pts[j], metric).unwrap();
                        assert!((d.get(i, j) - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn identical_cells_give_zero_matrix() {
        let s = Subspace::span_of(&Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.3, 1.0, 0.0, 0.5])).unwrap();
        let cells = CellSubspaceSet::new(vec![s.clone(), s.clone(), s], 2).unwrap();
        let d = distance_matrix(&cells, GrassmannMetric::Chordal).unwrap();
        assert!(d.values().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn martin_error_names_the_pair() {
        let a = Subspace::span_of(&Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let b = Subspace::span_of(&Matrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        let c = Subspace::span_of(&Matrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        let cells = CellSubspaceSet::new(vec![a, b, c], 1).unwrap();
        match distance_matrix(&cells, GrassmannMetric::Martin) {
            Err(PipelineError::Pair { i: 0, j: 2, source: GrassmannError::MartinDivergent { .. } }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distance_matrix_validation() {
        let ok = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(DistanceMatrix::new(ok, GrassmannMetric::Chordal).is_ok());
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(DistanceMatrix::new(asym, GrassmannMetric::Chordal).is_err());
        let diag = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!(DistanceMatrix::new(diag, GrassmannMetric::Chordal).is_err());
        let neg = Matrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(DistanceMatrix::new(neg, GrassmannMetric::Chordal).is_err());
    }

    #[test]
    fn too_few_cells() {
        let s = Subspace::span_of(&Matrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let cells = CellSubspaceSet::new(vec![s], 1).unwrap();
        assert_eq!(distance_matrix(&cells, GrassmannMetric::Chordal).unwrap_err(), PipelineError::TooFewCells(1));
    }
}
