//! Plain-text matrix formats.
//!
//! Sparse: a `rows cols nnz` header followed by one `row col value` line per
//! stored entry in `(row, col)` order. Dense: a `rows cols` header followed by
//! one line per row of whitespace-separated values. Values are written in the
//! shortest form that parses back to the same `f64`, so files round-trip
//! bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DenseMatrix, SparseMatrix};
use crate::error::{Error, Result};

pub fn sparse_to_string(m: &SparseMatrix) -> String {
    let mut s = String::with_capacity(16 * (m.nnz() + 1));
    writeln!(s, "{} {} {}", m.rows(), m.cols(), m.nnz()).unwrap();
    for (r, c, v) in m.iter() {
        writeln!(s, "{r} {c} {v:?}").unwrap();
    }
    s
}

pub fn dense_to_string(m: &DenseMatrix) -> String {
    let mut s = String::with_capacity(20 * m.rows() * m.cols() + 16);
    writeln!(s, "{} {}", m.rows(), m.cols()).unwrap();
    for r in 0..m.rows() {
        for (i, v) in m.row(r).iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v:?}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn numbers<'a, T: std::str::FromStr>(
    path: &'a Path,
    line: usize,
    text: &'a str,
) -> impl Iterator<Item = Result<T>> + 'a {
    text.split_whitespace().map(move |tok| {
        tok.parse::<T>()
            .map_err(|_| Error::parse(path, line, format!("cannot parse {tok:?}")))
    })
}

fn header(path: &Path, text: &str, n: usize) -> Result<Vec<usize>> {
    let first = text
        .lines()
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty matrix file"))?;
    let h = numbers::<usize>(path, 1, first).collect::<Result<Vec<_>>>()?;
    if h.len() != n {
        return Err(Error::parse(path, 1, format!("header needs {n} integers")));
    }
    Ok(h)
}

pub fn sparse_from_str(path: &Path, text: &str) -> Result<SparseMatrix> {
    let h = header(path, text, 3)?;
    let (rows, cols, nnz) = (h[0], h[1], h[2]);
    let mut entries = Vec::with_capacity(nnz);
    let mut prev: Option<(usize, usize)> = None;
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let no = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::parse(path, no, "expected `row col value`"));
        }
        let parse_idx = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(path, no, format!("bad index {t:?}")))
        };
        let r = parse_idx(toks[0])?;
        let c = parse_idx(toks[1])?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| Error::parse(path, no, format!("bad value {:?}", toks[2])))?;
        if prev.is_some_and(|p| p >= (r, c)) {
            return Err(Error::parse(path, no, "entries must be sorted by (row, col)"));
        }
        if r >= rows || c >= cols {
            return Err(Error::parse(path, no, "entry outside declared shape"));
        }
        prev = Some((r, c));
        entries.push((r, c, v));
    }
    if entries.len() != nnz {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {nnz} entries, found {}", entries.len()),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, entries)
}

pub fn dense_from_str(path: &Path, text: &str) -> Result<DenseMatrix> {
    let h = header(path, text, 2)?;
    let (rows, cols) = (h[0], h[1]);
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for v in numbers::<f64>(path, i + 1, line) {
            data.push(v?);
        }
        if data.len() - before != cols {
            return Err(Error::parse(path, i + 1, format!("expected {cols} values")));
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {rows} rows, found {seen_rows}"),
        ));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn write_sparse(path: impl AsRef<Path>, m: &SparseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, sparse_to_string(m)).map_err(|e| Error::io(path, e))
}

pub fn write_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dense_to_string(m)).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    sparse_from_str(path, &read(path)?)
}

pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    dense_from_str(path, &read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sparse_text_layout() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(1, 0, 0.25), (0, 2, -1.0)]).unwrap();
        assert_eq!(sparse_to_string(&m), "2 3 2\n0 2 -1.0\n1 0 0.25\n");
    }

    #[test]
    fn rejects_unsorted_and_bad_counts() {
        let p = Path::new("m.txt");
        assert!(sparse_from_str(p, "2 2 2\n1 0 1.0\n0 0 1.0\n").is_err());
        assert!(sparse_from_str(p, "2 2 2\n0 0 1.0\n").is_err());
        assert!(dense_from_str(p, "2 2\n1 2\n3\n").is_err());
    }

    proptest! {
        #[test]
        fn dense_round_trips_bitwise(
            rows in 0usize..5,
            cols in 1usize..5,
            vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 25),
        ) {
            let m = DenseMatrix::from_fn(rows, cols, |r, c| vals[r * 5 + c]);
            let back = dense_from_str(Path::new("x"), &dense_to_string(&m)).unwrap();
            prop_assert_eq!(
                back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn sparse_round_trips_bitwise(
            entries in proptest::collection::vec((0usize..6, 0usize..6, -1e6f64..1e6), 0..20),
        ) {
            let m = SparseMatrix::from_triplets(6, 6, entries).unwrap();
            let back = sparse_from_str(Path::new("x"), &sparse_to_string(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
