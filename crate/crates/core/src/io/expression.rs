use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::matrix_file::{parse_field, reader, Delimiter};
use super::IoError;
use crate::linalg::median;
use crate::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Tsv,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Self {
        match Delimiter::from_path(path) {
            Delimiter::Tab => FileFormat::Tsv,
            Delimiter::Comma => FileFormat::Csv,
        }
    }

    fn delimiter(self) -> Delimiter {
        match self {
            FileFormat::Csv => Delimiter::Comma,
            FileFormat::Tsv => Delimiter::Tab,
        }
    }
}

impl FromStr for FileFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(FileFormat::Csv),
            "tsv" => Ok(FileFormat::Tsv),
            other => Err(IoError::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    CellsAsRows,
    CellsAsCols,
}

impl FromStr for Orientation {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "cells-as-rows" | "rows" => Ok(Orientation::CellsAsRows),
            "cells-as-cols" | "cols" | "columns" => Ok(Orientation::CellsAsCols),
            other => Err(IoError::Config(format!("unknown orientation '{other}'"))),
        }
    }
}

/// How to read an expression file. `None` fields are detected: a header row
/// exists if any field of the first record is non-numeric, and an id column
/// exists if the first field of the first data record is non-numeric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub format: FileFormat,
    pub orientation: Orientation,
    pub header: Option<bool>,
    pub row_ids: Option<bool>,
}

impl LoadOptions {
    pub fn new(format: FileFormat, orientation: Orientation) -> Self {
        Self { format, orientation, header: None, row_ids: None }
    }
}

/// Class labels as names plus dense ids in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabels {
    names: Vec<String>,
    ids: Vec<usize>,
}

impl ClassLabels {
    pub fn from_names<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut names: Vec<String> = Vec::new();
        let ids = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                match names.iter().position(|n| n == l) {
                    Some(i) => i,
                    None => {
                        names.push(l.to_string());
                        names.len() - 1
                    }
                }
            })
            .collect();
        Self { names, ids }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn class_count(&self) -> usize {
        self.names.len()
    }

    pub fn name_of(&self, sample: usize) -> &str {
        &self.names[self.ids[sample]]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        Self { names: self.names.clone(), ids: perm.iter().map(|&i| self.ids[i]).collect() }
    }
}

/// Samples-by-features matrix with optional identifiers and labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpressionMatrix {
    values: Matrix,
    sample_ids: Option<Vec<String>>,
    feature_ids: Option<Vec<String>>,
    labels: Option<ClassLabels>,
}

impl ExpressionMatrix {
    pub fn new(values: Matrix) -> Result<Self, IoError> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(IoError::Empty);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(IoError::NonFinite { row: r + 1, col: c + 1 });
        }
        Ok(Self { values, sample_ids: None, feature_ids: None, labels: None })
    }

    pub fn with_sample_ids(mut self, ids: Vec<String>) -> Result<Self, IoError> {
        if ids.len() != self.values.nrows() {
            return Err(IoError::IdLengthMismatch(ids.len(), self.values.nrows()));
        }
        self.sample_ids = Some(ids);
        Ok(self)
    }

    pub fn with_feature_ids(mut self, ids: Vec<String>) -> Result<Self, IoError> {
        if ids.len() != self.values.ncols() {
            return Err(IoError::IdLengthMismatch(ids.len(), self.values.ncols()));
        }
        self.feature_ids = Some(ids);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: ClassLabels) -> Result<Self, IoError> {
        if labels.len() != self.values.nrows() {
            return Err(IoError::LabelLengthMismatch { labels: labels.len(), samples: self.values.nrows() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn sample_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    pub fn feature_ids(&self) -> Option<&[String]> {
        self.feature_ids.as_deref()
    }

    pub fn labels(&self) -> Option<&ClassLabels> {
        self.labels.as_ref()
    }

    /// Samples reordered: row `i` of the result is row `perm[i]`.
    pub fn permuted_samples(&self, perm: &[usize]) -> Self {
        Self {
            values: Matrix::from_fn(perm.len(), self.values.ncols(), |r, c| self.values[(perm[r], c)]),
            sample_ids: self.sample_ids.as_ref().map(|ids| perm.iter().map(|&i| ids[i].clone()).collect()),
            feature_ids: self.feature_ids.clone(),
            labels: self.labels.as_ref().map(|l| l.permuted(perm)),
        }
    }

    /// SHA-256 over the shape and the little-endian bytes of the values
    /// in row-major order.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.values.nrows() as u64).to_le_bytes());
        h.update((self.values.ncols() as u64).to_le_bytes());
        for row in self.values.row_iter() {
            for v in row.iter() {
                h.update(v.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Loads an expression file and normalizes it to cells as rows.
pub fn load_matrix(path: &Path, opts: &LoadOptions) -> Result<ExpressionMatrix, IoError> {
    let mut rdr = reader(path, opts.format.delimiter())?;
    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IoError::file(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((r + 1, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(IoError::Empty);
    }
    let is_num = |s: &str| s.parse::<f64>().is_ok();
    let header = opts.header.unwrap_or_else(|| records[0].1.iter().any(|f| !is_num(f)));
    let (header_row, body) = if header {
        let (h, b) = records.split_first().expect("nonempty");
        (Some(h.1.clone()), b)
    } else {
        (None, &records[..])
    };
    let Some(first) = body.first() else {
        return Err(IoError::Empty);
    };
    let row_ids = opts.row_ids.unwrap_or_else(|| !is_num(&first.1[0]));
    let skip = usize::from(row_ids);
    let width = first.1.len();
    if width <= skip {
        return Err(IoError::Empty);
    }
    let mut data = Vec::with_capacity(body.len() * (width - skip));
    let mut ids = Vec::new();
    for (line, fields) in body {
        if fields.len() != width {
            return Err(IoError::RaggedRows { row: *line, expected: width, got: fields.len() });
        }
        if row_ids {
            ids.push(fields[0].clone());
        }
        for (c, token) in fields.iter().enumerate().skip(skip) {
            data.push(parse_field(token, *line, c + 1)?);
        }
    }
    let table = Matrix::from_row_slice(body.len(), width - skip, &data);
    let col_ids = header_row.map(|h| {
        // a header may or may not carry a name for the id column
        let offset = if h.len() == width { skip } else { 0 };
        h.into_iter().skip(offset).collect::<Vec<_>>()
    });
    if let Some(c) = &col_ids {
        if c.len() != width - skip {
            return Err(IoError::RaggedRows { row: 1, expected: width, got: c.len() + skip });
        }
    }
    let row_ids = row_ids.then_some(ids);
    let (values, sample_ids, feature_ids) = match opts.orientation {
        Orientation::CellsAsRows => (table, row_ids, col_ids),
        Orientation::CellsAsCols => (table.transpose(), col_ids, row_ids),
    };
    let mut x = ExpressionMatrix::new(values)?;
    if let Some(s) = sample_ids {
        x = x.with_sample_ids(s)?;
    }
    if let Some(f) = feature_ids {
        x = x.with_feature_ids(f)?;
    }
    Ok(x)
}

/// One label per line, trailing blank lines ignored.
pub fn load_labels(path: &Path) -> Result<Vec<String>, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let mut labels: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
    while labels.last().is_some_and(String::is_empty) {
        labels.pop();
    }
    Ok(labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Scale every cell to the median cell total.
    pub normalize_total: bool,
    /// Apply `log(1 + v)`.
    pub log1p: bool,
    /// Keep only the highest-variance features, after the other steps.
    pub top_features: Option<usize>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { normalize_total: true, log1p: true, top_features: None }
    }
}

pub fn preprocess(x: &ExpressionMatrix, opts: &PreprocessOptions) -> Result<ExpressionMatrix, IoError> {
    let mut values = x.values.clone();
    let (m, n) = values.shape();
    let first_below = |values: &Matrix, bound: f64| -> Option<(usize, usize, f64)> {
        (0..m).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| (r, c, values[(r, c)])).find(|t| t.2 < bound)
    };
    if opts.normalize_total {
        if let Some((r, c, v)) = first_below(&values, 0.0) {
            return Err(IoError::NegativeValues { row: r + 1, col: c + 1, value: v });
        }
        let totals: Vec<f64> = values.row_iter().map(|r| r.sum()).collect();
        let target = median(&mut totals.clone()).unwrap_or(0.0);
        if target > 0.0 {
            for (r, &t) in totals.iter().enumerate() {
                if t > 0.0 {
                    let mut row = values.row_mut(r);
                    row *= target / t;
                }
            }
        }
    }
    if opts.log1p {
        if let Some((r, c, v)) = first_below(&values, -1.0 + f64::EPSILON) {
            return Err(IoError::NegativeValues { row: r + 1, col: c + 1, value: v });
        }
        values.apply(|v| *v = v.ln_1p());
    }
    let mut feature_ids = x.feature_ids.clone();
    if let Some(top) = opts.top_features.filter(|&t| t < n) {
        let var: Vec<f64> = values
            .column_iter()
            .map(|c| {
                let mean = c.mean();
                c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
        let mut keep: Vec<usize> = order.into_iter().take(top.max(1)).collect();
        keep.sort_unstable();
        values = Matrix::from_fn(m, keep.len(), |r, c| values[(r, keep[c])]);
        feature_ids = feature_ids.map(|ids| keep.iter().map(|&i| ids[i].clone()).collect());
    }
    Ok(ExpressionMatrix {
        values,
        sample_ids: x.sample_ids.clone(),
        feature_ids,
        labels: x.labels.clone(),
    })
}
