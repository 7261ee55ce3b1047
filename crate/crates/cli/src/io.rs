//! CSV tables and input files.
//!
//! Tables are comma separated with a header row and LF line endings. Floats
//! are written with 17 significant digits, which round-trips every `f64`.

use std::path::Path;

use nullcone::{Matrix, WeightedEdge};
use sha2::{Digest, Sha256};

use crate::InputError;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// In-memory CSV table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Long-form matrix table `row_id,col_id,value`.
pub fn long_matrix() -> Table {
    Table::new(&["row_id", "col_id", "value"])
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, InputError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError::new(path.display().to_string(), e.to_string()))
}

fn at(path: &Path, line: u64) -> String {
    format!("{}:{line}", path.display())
}

fn record_line(path: &Path, r: &csv::StringRecord) -> String {
    at(path, r.position().map_or(0, |p| p.line()))
}

fn csv_err(path: &Path, e: csv::Error) -> InputError {
    let line = e.position().map_or(0, |p| p.line());
    InputError::new(at(path, line), e.to_string())
}

fn parse_f64(s: &str, loc: &str, col: usize) -> Result<f64, InputError> {
    s.parse::<f64>().map_err(|_| InputError::new(format!("{loc}:{col}"), format!("`{s}` is not a number")))
}

/// Reads a long-form matrix table back as `(row_id, col_id, value)` triples.
pub fn read_long_matrix(path: &Path) -> Result<Vec<(String, String, f64)>, InputError> {
    let mut rd = reader(path)?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["row_id", "col_id", "value"] {
        return Err(InputError::new(at(path, 1), "expected header `row_id,col_id,value`"));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let loc = record_line(path, &rec);
        out.push((rec[0].to_string(), rec[1].to_string(), parse_f64(&rec[2], &loc, 3)?));
    }
    Ok(out)
}

/// Distance matrix table: a header row of point ids, then one row of
/// distances per point. The matrix is returned unchecked.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Matrix), InputError> {
    let mut rd = reader(path)?;
    let ids: Vec<String> = rd.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    if ids.is_empty() || ids.iter().any(String::is_empty) {
        return Err(InputError::new(at(path, 1), "header must list the point ids"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let loc = record_line(path, &rec);
        let row = rec.iter().enumerate().map(|(c, s)| parse_f64(s, &loc, c + 1)).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != ids.len() {
        return Err(InputError::new(
            path.display().to_string(),
            format!("{} ids in the header but {} matrix rows", ids.len(), rows.len()),
        ));
    }
    let m = Matrix::from_rows(&rows).map_err(|e| InputError::new(path.display().to_string(), e.to_string()))?;
    Ok((ids, m))
}

/// Edge list `src,dst,weight` with 0-based indices; returns the point count
/// (largest index plus one) and the edges.
pub fn read_edge_csv(path: &Path) -> Result<(usize, Vec<WeightedEdge<f64>>), InputError> {
    let mut rd = reader(path)?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["src", "dst", "weight"] {
        return Err(InputError::new(at(path, 1), "expected header `src,dst,weight`"));
    }
    let mut edges = Vec::new();
    let mut n = 0;
    for rec in rd.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let loc = record_line(path, &rec);
        let index = |c: usize| {
            rec[c].parse::<usize>().map_err(|_| InputError::new(format!("{loc}:{}", c + 1), format!("`{}` is not an index", &rec[c])))
        };
        let (u, v) = (index(0)?, index(1)?);
        n = n.max(u + 1).max(v + 1);
        edges.push(WeightedEdge::new(u, v, parse_f64(&rec[2], &loc, 3)?));
    }
    Ok((n, edges))
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), InputError> {
    let bytes = std::fs::read(path).map_err(|e| InputError::new(path.display().to_string(), e.to_string()))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}
