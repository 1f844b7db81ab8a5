//! JSON helpers shared by the CLI, the FFI layer and the report dumps.

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::complex_sets::{CSet, Label};
use crate::error::{Error, Result};
use crate::fock::C64;

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// A real or complex matrix serialized with its shape.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<C64>>,
}

impl From<&DMatrix<C64>> for MatrixJson {
    fn from(m: &DMatrix<C64>) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: matrix_rows(m),
        }
    }
}

/// Deserializes `text`, reporting the JSON path of the offending field.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            Error::Parse(inner.to_string())
        } else {
            Error::Parse(format!("at `{path}`: {inner}"))
        }
    })
}

/// Reads a JSON argument that is either inline JSON or a path to a file.
pub fn read_json_arg(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Error::Parse(format!("cannot read `{arg}`: {e}")))
}

/// Labels from `[[re, im], ...]`, validated as a set.
pub fn parse_labels(text: &str) -> Result<Vec<Label>> {
    let labels: Vec<Label> = from_json_str(text)?;
    CSet::new(labels.iter().copied())?;
    Ok(labels)
}

pub fn parse_set(text: &str) -> Result<CSet> {
    CSet::new(from_json_str::<Vec<Label>>(text)?)
}
