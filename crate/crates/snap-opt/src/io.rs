//! Plain-text readers and writers for dense matrices and vectors.
//!
//! Matrices use the same format as the polyhedron file: a header line
//! `rows cols` followed by `rows` lines of `cols` numbers. Vectors are
//! whitespace- or comma-separated numbers with no header.

use crate::{Error, Matrix, Result, Vector};
use std::path::Path;

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut tokens = text.split_whitespace();
    let rows = parse_num(tokens.next())? as usize;
    let cols = parse_num(tokens.next())? as usize;
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = parse_num(tokens.next())?;
        }
    }
    Ok(m)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.17e}", m[(r, c)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vector> {
    let text = std::fs::read_to_string(path)?;
    parse_vector(&text)
}

/// Parse comma- or whitespace-separated numbers.
pub fn parse_vector(text: &str) -> Result<Vector> {
    let vals: Result<Vec<f64>> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{t}`"))))
        .collect();
    let vals = vals?;
    if vals.is_empty() {
        return Err(Error::Parse("empty vector".into()));
    }
    Ok(Vector::from_vec(vals))
}

fn parse_num(tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    tok.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{tok}`")))
}
