//! Whitespace-separated matrices with a `rows cols` header line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use popart::{Matrix, Vector};

use crate::error::{CliError, Result};

pub fn parse_matrix(text: &str) -> Result<Matrix, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty matrix file")?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad header `{header}`")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format!("header must be `rows cols`, got `{header}`"));
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| format!("bad number `{t}`")))
        .collect::<Result<_, _>>()?;
    if values.len() != rows * cols {
        return Err(format!(
            "header says {rows}x{cols} but found {} values",
            values.len()
        ));
    }
    Ok(Matrix::from_row_slice(rows, cols, &values))
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A vector stored either as one row or one column.
pub fn read_vector(path: &Path) -> Result<Vector> {
    let m = read_matrix(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(CliError::Config(format!(
            "{}: expected a vector, got a {}x{} matrix",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Vector::from_iterator(m.len(), m.iter().copied()))
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| CliError::io(path, e))
}
