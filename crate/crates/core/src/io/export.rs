//! Result files: distance matrices with metadata, labels, scatter
//! coordinates and JSON reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{format_f64, read_numeric_matrix, write_numeric_matrix, Delimiter, IoError};
use crate::cluster::{classical_mds, ClusterError};
use crate::grassmann::GrassmannMetric;
use crate::pipeline::DistanceMatrix;
use crate::{Error, Matrix};

/// Companion record written next to every exported `D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeta {
    pub metric: GrassmannMetric,
    /// Embedding dimension (ambient dimension of the subspaces).
    pub n: usize,
    pub p: usize,
    pub scales: Vec<usize>,
    pub seed: u64,
    pub cells: usize,
}

/// `dir/name.csv` → `dir/name.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IoError::Json(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

/// Full `M × M` matrix plus the metadata sidecar.
pub fn write_distance_matrix(path: &Path, d: &DistanceMatrix, meta: &DistanceMeta) -> Result<(), IoError> {
    write_numeric_matrix(path, d.values(), Delimiter::from_path(path))?;
    write_json(&meta_path(path), meta)
}

/// Reads a square distance file. The metric comes from the sidecar when it
/// exists and defaults to chordal otherwise.
pub fn read_distance_matrix(path: &Path) -> Result<(DistanceMatrix, Option<DistanceMeta>), Error> {
    let values = read_numeric_matrix(path, Delimiter::from_path(path))?;
    let mp = meta_path(path);
    let meta: Option<DistanceMeta> = if mp.exists() {
        let text = fs::read_to_string(&mp).map_err(|e| IoError::file(&mp, e))?;
        Some(serde_json::from_str(&text).map_err(|e| IoError::Json(format!("{}: {e}", mp.display())))?)
    } else {
        None
    };
    let metric = meta.as_ref().map_or(GrassmannMetric::Chordal, |m| m.metric);
    let d = DistanceMatrix::new(values, metric)?;
    Ok((d, meta))
}

/// One label per line.
pub fn write_labels<T: ToString>(path: &Path, labels: &[T]) -> Result<(), IoError> {
    let mut text = String::new();
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

/// Integer cluster ids, one per line.
pub fn read_labels(path: &Path) -> Result<Vec<usize>, IoError> {
    super::load_labels(path)?
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse().map_err(|_| IoError::Parse { row: i + 1, col: 1, token: s.clone() }))
        .collect()
}

/// Two-dimensional classical MDS coordinates of `d`.
///
/// A zero matrix places every point at the origin.
pub fn export_scatter(d: &DistanceMatrix) -> Result<Matrix, Error> {
    let m = d.size();
    if m < 3 {
        return Err(ClusterError::InvalidEmbedDim { dim: 2, max: m.saturating_sub(1) }.into());
    }
    Ok(classical_mds(d.values(), 2).coords)
}

/// `x,y,label` CSV with a header row.
pub fn write_scatter<S: AsRef<str>>(path: &Path, coords: &Matrix, labels: &[S]) -> Result<(), IoError> {
    if labels.len() != coords.nrows() {
        return Err(IoError::LabelLengthMismatch { labels: labels.len(), samples: coords.nrows() });
    }
    let mut out = Vec::new();
    writeln!(out, "x,y,label").expect("in-memory write");
    for (row, label) in coords.row_iter().zip(labels) {
        let label = label.as_ref();
        let field = if label.contains([',', '"', '\n']) { format!("\"{}\"", label.replace('"', "\"\"")) } else { label.to_string() };
        writeln!(out, "{},{},{}", format_f64(row[0]), format_f64(row[1]), field).expect("in-memory write");
    }
    fs::write(path, out).map_err(|e| IoError::file(path, e))
}
