//! Dense numeric CSV input: comma-separated, header-free, LF or CRLF line
//! endings. Parse failures carry the 1-based line number.

use crate::error::{Error, Result};
use std::path::Path;

fn parse_line(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| {
                Error::Data(format!(
                    "line {lineno}: cannot parse '{}' as a number",
                    field.trim()
                ))
            })
        })
        .collect()
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_line(line, i + 1)?);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// A rectangular numeric matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let rows = read_rows(path)?;
    let width = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Data(format!(
                "{}: line {} has {} fields, expected {width}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
    }
    Ok(rows)
}

/// A single-column series (one value per line).
pub fn read_column_csv(path: &Path) -> Result<Vec<f64>> {
    let rows = read_rows(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != 1 {
                return Err(Error::Data(format!(
                    "{}: line {} has {} fields, expected a single column",
                    path.display(),
                    i + 1,
                    row.len()
                )));
            }
            Ok(row[0])
        })
        .collect()
}

/// A two-column (x, y) series.
pub fn read_xy_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = read_rows(path)?;
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 2 {
            return Err(Error::Data(format!(
                "{}: line {} has {} fields, expected two columns",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        xs.push(row[0]);
        ys.push(row[1]);
    }
    Ok((xs, ys))
}
