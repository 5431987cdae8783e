//! Numeric CSV ingestion and emission. Rows are observations, columns are
//! variables; a non-numeric first row is treated as a header. Parsing is
//! locale-independent and errors carry row/column coordinates.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CoefVector, DesignMatrix};

struct ParsedCsv {
    header: Option<Vec<String>>,
    rows: Vec<Vec<f64>>,
}

fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(|c| c.trim()).collect();
        if rows.is_empty() && header.is_none() {
            // header detection: a non-numeric first row names the columns
            if cells.iter().any(|c| c.parse::<f64>().is_err()) {
                header = Some(cells.iter().map(|c| c.to_string()).collect());
                continue;
            }
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col_no, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column {}: '{}' is not a number",
                    line_no + 1,
                    col_no + 1,
                    cell
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Parse(format!(
                    "row {}, column {}: non-finite value",
                    line_no + 1,
                    col_no + 1
                )));
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, expected {}",
                    line_no + 1,
                    row.len(),
                    w
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no numeric rows".into()));
    }
    Ok(ParsedCsv { header, rows })
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a matrix CSV; returns the design and the header names when present.
pub fn ingest_matrix(path: &Path) -> Result<(DesignMatrix, Option<Vec<String>>)> {
    let parsed = parse_csv(&read_to_string(path)?)?;
    Ok((DesignMatrix::from_rows(&parsed.rows)?, parsed.header))
}

/// Reads a vector CSV: either one column or one row.
pub fn ingest_vector(path: &Path) -> Result<CoefVector> {
    let parsed = parse_csv(&read_to_string(path)?)?;
    let values = if parsed.rows.len() == 1 {
        parsed.rows.into_iter().next().unwrap()
    } else if parsed.rows.iter().all(|r| r.len() == 1) {
        parsed.rows.into_iter().map(|r| r[0]).collect()
    } else {
        return Err(Error::Parse(
            "vector file must be a single row or a single column".into(),
        ));
    };
    CoefVector::new(values)
}

/// Formats a matrix as CSV with full round-trip precision.
pub fn matrix_to_csv(x: &DesignMatrix) -> String {
    let mut out = String::new();
    for i in 0..x.n() {
        for j in 0..x.p() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:?}", x.entries()[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Formats a vector as a one-column CSV.
pub fn vector_to_csv(v: &CoefVector) -> String {
    let mut out = String::new();
    for value in v.values() {
        let _ = writeln!(out, "{value:?}");
    }
    out
}

pub fn emit_matrix(path: &Path, x: &DesignMatrix) -> Result<()> {
    std::fs::write(path, matrix_to_csv(x))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("lassolab_io_{}_{name}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn reads_plain_matrix() {
        let path = tmp("plain.csv", "1.0,2.0,3.0\n4.0,5.0,6.0\n");
        let (x, header) = ingest_matrix(&path).unwrap();
        assert_eq!((x.n(), x.p()), (2, 3));
        assert!(header.is_none());
        assert_eq!(x.entries()[(1, 2)], 6.0);
    }

    #[test]
    fn header_row_is_detected_and_kept() {
        let path = tmp("header.csv", "a,b\n1,2\n3,4\n");
        let (x, header) = ingest_matrix(&path).unwrap();
        assert_eq!((x.n(), x.p()), (2, 2));
        assert_eq!(header.unwrap(), vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn errors_carry_coordinates() {
        let path = tmp("ragged.csv", "1,2\n3\n");
        let err = ingest_matrix(&path).unwrap_err();
        assert!(err.to_string().contains("row 2"));

        let path = tmp("bad_cell.csv", "1,2\n3,x\n");
        let err = ingest_matrix(&path).unwrap_err();
        assert!(err.to_string().contains("row 2, column 2"));

        let path = tmp("empty.csv", "\n");
        assert!(ingest_matrix(&path).is_err());
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..3).map(|j| ((i * 3 + j) as f64 * 0.123456789).sin()).collect())
            .collect();
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let path = tmp("roundtrip.csv", &matrix_to_csv(&x));
        let (back, _) = ingest_matrix(&path).unwrap();
        assert_eq!(x.entries(), back.entries());
    }

    #[test]
    fn vector_round_trip() {
        let v = CoefVector::new(vec![0.25, -1.5, 3.0]).unwrap();
        let path = tmp("vec.csv", &vector_to_csv(&v));
        let back = ingest_vector(&path).unwrap();
        assert_eq!(v.values(), back.values());
    }
}
