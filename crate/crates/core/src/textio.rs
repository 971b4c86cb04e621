//! Plain-text matrix format.
//!
//! ```text
//! 2 3
//! 1 0 -1
//! 0.5 2 3
//! ```
//!
//! The first line holds `rows cols`; each following non-empty line holds one
//! row of whitespace-separated decimals. Values are written with 17
//! significant digits so a write/read cycle is lossless. Lines starting with
//! `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub fn format_value(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn write_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    // a matrix without columns has no row lines
    let body_rows = if m.cols() == 0 { 0 } else { m.rows() };
    for i in 0..body_rows {
        let line: Vec<String> = m.row(i).iter().map(|&v| format_value(v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(lineno: usize, line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize> {
        tok.ok_or_else(|| Error::Parse(format!("line {}: expected 'rows cols'", lineno)))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("line {}: {}", lineno, e)))
    };
    let rows = parse(it.next())?;
    let cols = parse(it.next())?;
    if it.next().is_some() {
        return Err(Error::Parse(format!(
            "line {}: header must contain exactly two integers",
            lineno
        )));
    }
    Ok((rows, cols))
}

fn parse_row(lineno: usize, line: &str, cols: usize) -> Result<Vec<f64>> {
    let row = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: '{}': {}", lineno, tok, e)))
        })
        .collect::<Result<Vec<_>>>()?;
    if row.len() != cols {
        return Err(Error::Parse(format!(
            "line {}: expected {} values, found {}",
            lineno,
            cols,
            row.len()
        )));
    }
    Ok(row)
}

fn read_from_lines<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<DenseMatrix> {
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing 'rows cols' header".into()))?;
    let (rows, cols) = parse_header(lineno, header)?;
    let mut data = Vec::with_capacity(rows * cols);
    let body_rows = if cols == 0 { 0 } else { rows };
    for r in 0..body_rows {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {} rows, found {}", rows, r)))?;
        data.extend(parse_row(lineno, line, cols)?);
    }
    DenseMatrix::from_row_major(rows, cols, data).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = content_lines(text);
    let m = read_from_lines(&mut lines)?;
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::Parse(format!("line {}: trailing content", lineno)));
    }
    Ok(m)
}

/// Parses a sequence of labelled matrices (`label` line followed by a
/// matrix), returning them in file order.
pub fn parse_labelled(text: &str) -> Result<Vec<(String, DenseMatrix)>> {
    let mut lines = content_lines(text).peekable();
    let mut out = Vec::new();
    while let Some((_, label)) = lines.next() {
        let m = read_from_lines(&mut lines)?;
        out.push((label.to_string(), m));
    }
    Ok(out)
}

pub fn write_labelled(items: &[(&str, &DenseMatrix)]) -> String {
    let mut out = String::new();
    for (label, m) in items {
        out.push_str(label);
        out.push('\n');
        out.push_str(&write_matrix(m));
    }
    out
}

pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    parse_matrix(&text)
}

pub fn write_matrix_file(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, write_matrix(m)).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_matrix() {
        let m = parse_matrix("2 2\n1 2\n# comment\n3 4.5\n").unwrap();
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0, 4.5]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2\n3\n").is_err());
        assert!(parse_matrix("2 2\n1 2\n3 x\n").is_err());
        assert!(parse_matrix("1 1\n1\n2\n").is_err());
        assert!(parse_matrix("1 1\nnan\n").is_err());
    }

    #[test]
    fn labelled_blocks() {
        let p = DenseMatrix::identity(2);
        let q = DenseMatrix::zeros(0, 2);
        let text = write_labelled(&[("P", &p), ("Q", &q)]);
        let parsed = parse_labelled(&text).unwrap();
        assert_eq!(parsed[0].0, "P");
        assert_eq!(parsed[0].1, p);
        assert_eq!(parsed[1].1.shape(), (0, 2));
    }

    proptest! {
        #[test]
        fn write_read_is_lossless(
            rows in 0usize..5,
            cols in 0usize..5,
            seed in proptest::collection::vec(-1e300f64..1e300, 25),
        ) {
            let data: Vec<f64> = seed.into_iter().take(rows * cols).collect();
            let m = DenseMatrix::from_row_major(rows, cols, data).unwrap();
            let back = parse_matrix(&write_matrix(&m)).unwrap();
            prop_assert_eq!(back.as_slice(), m.as_slice());
            prop_assert_eq!(back.shape(), m.shape());
        }
    }
}
