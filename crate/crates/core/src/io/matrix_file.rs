use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::IoError;
use crate::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    /// Tab for `.tsv`/`.tab`/`.txt`, comma otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("tsv") | Some("tab") | Some("txt") => Delimiter::Tab,
            _ => Delimiter::Comma,
        }
    }

    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn reader(path: &Path, delimiter: Delimiter) -> Result<csv::Reader<File>, IoError> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(delimiter.byte())
        .from_path(path)
        .map_err(|e| IoError::file(path, e))
}

pub(crate) fn parse_field(token: &str, row: usize, col: usize) -> Result<f64, IoError> {
    let v: f64 = token.parse().map_err(|_| IoError::Parse { row, col, token: token.to_string() })?;
    if !v.is_finite() {
        return Err(IoError::NonFinite { row, col });
    }
    Ok(v)
}

/// Headerless rectangular numeric file. Error positions are 1-based.
pub fn read_numeric_matrix(path: &Path, delimiter: Delimiter) -> Result<Matrix, IoError> {
    let mut rdr = reader(path, delimiter)?;
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| IoError::file(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(IoError::RaggedRows { row: r + 1, expected, got: record.len() });
        }
        for (c, token) in record.iter().enumerate() {
            data.push(parse_field(token, r + 1, c + 1)?);
        }
        rows += 1;
    }
    let cols = width.ok_or(IoError::Empty)?;
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub fn write_numeric_matrix(path: &Path, m: &Matrix, delimiter: Delimiter) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut out = BufWriter::new(file);
    let sep = delimiter.byte() as char;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(out, "{}", line.join(&sep.to_string())).map_err(|e| IoError::file(path, e))?;
    }
    out.flush().map_err(|e| IoError::file(path, e))
}
