//! Readers and writers for the on-disk formats.
//!
//! * Sparse matrices: MatrixMarket coordinate files
//!   (`%%MatrixMarket matrix coordinate real general`, 1-based indices), or a
//!   headerless text file of `row col value` triples (1-based, whitespace
//!   separated, `#`/`%` comments) whose dimensions are the largest indices.
//! * Dense matrices: comma-separated rows; blank lines and lines starting
//!   with `#` are skipped.
//! * Labels: one integer class label per line.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{DataMatrix, DenseMatrix, SparseMatrix};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("not a number: {tok:?}"),
        })?;
    if !v.is_finite() {
        return parse_err(line, format!("non-finite value {tok}"));
    }
    if v < 0.0 {
        return parse_err(line, format!("negative value {v}"));
    }
    Ok(v)
}

fn parse_index(tok: &str, bound: Option<usize>, line: usize) -> Result<usize> {
    let i: usize = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not an index: {tok:?}"),
    })?;
    if i == 0 || bound.is_some_and(|b| i > b) {
        return parse_err(line, format!("index {i} out of range"));
    }
    Ok(i - 1)
}

/// Parses a sparse matrix; zero entries are dropped, repeated coordinates
/// rejected.
pub fn read_sparse<R: Read>(reader: R) -> Result<SparseMatrix> {
    let lines: Vec<String> = BufReader::new(reader).lines().collect::<std::io::Result<_>>()?;
    let Some(first) = lines.first().map(|l| l.trim()) else {
        return parse_err(1, "empty file");
    };

    let header = first.starts_with("%%MatrixMarket");
    if header {
        let fields: Vec<String> = first.split_whitespace().map(str::to_lowercase).collect();
        if fields.len() < 5
            || fields[1] != "matrix"
            || fields[2] != "coordinate"
            || !matches!(fields[3].as_str(), "real" | "integer")
            || fields[4] != "general"
        {
            return parse_err(
                1,
                format!("unsupported header {first:?}; expected `matrix coordinate real general`"),
            );
        }
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triplets = Vec::new();
    let mut stored = 0usize;
    let mut max_idx = (0usize, 0usize);

    for (idx, line) in lines.iter().enumerate().skip(usize::from(header)) {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if header && dims.is_none() {
            if toks.len() != 3 {
                return parse_err(line_no, "size line must be `rows cols nnz`");
            }
            let p = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad size field {s:?}"),
                })
            };
            dims = Some((p(toks[0])?, p(toks[1])?, p(toks[2])?));
            continue;
        }
        if toks.len() != 3 {
            return parse_err(line_no, format!("expected `row col value`, got {t:?}"));
        }
        let (rb, cb) = match dims {
            Some((r, c, _)) => (Some(r), Some(c)),
            None => (None, None),
        };
        let i = parse_index(toks[0], rb, line_no)?;
        let j = parse_index(toks[1], cb, line_no)?;
        let v = parse_value(toks[2], line_no)?;
        if let Some(prev) = seen.insert((i, j), line_no) {
            return parse_err(
                line_no,
                format!("entry ({}, {}) already given on line {prev}", i + 1, j + 1),
            );
        }
        stored += 1;
        max_idx = (max_idx.0.max(i + 1), max_idx.1.max(j + 1));
        if v > 0.0 {
            triplets.push((i, j, v));
        }
    }

    let (rows, cols) = match dims {
        Some((r, c, nnz)) => {
            if stored != nnz {
                return parse_err(0, format!("header announces {nnz} entries, found {stored}"));
            }
            (r, c)
        }
        None if header => return parse_err(0, "missing size line"),
        None => max_idx,
    };
    SparseMatrix::from_triplets(rows, cols, triplets)
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_sparse(File::open(path)?)
}

/// Writes MatrixMarket coordinate format with full-precision values.
pub fn write_sparse<W: Write>(x: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", x.rows(), x.cols(), x.nnz())?;
    for (i, j, v) in x.iter() {
        writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn save_sparse(x: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse(x, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parses a comma-separated nonnegative dense matrix.
pub fn read_dense<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut values = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let before = values.len();
        for tok in t.split(',') {
            values.push(parse_value(tok.trim(), idx + 1)?);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return parse_err(idx + 1, format!("row has {width} fields, expected {c}"))
            }
            _ => {}
        }
        rows += 1;
    }
    DenseMatrix::from_vec(rows, cols.unwrap_or(0), values)
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_dense(File::open(path)?)
}

/// Writes comma-separated rows with round-trippable numbers, after optional
/// `#` comment lines.
pub fn write_dense<W: Write>(x: &DenseMatrix, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut line = String::new();
    for i in 0..x.rows() {
        line.clear();
        for (j, v) in x.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_dense(x: &DenseMatrix, comments: &[String], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dense(x, comments, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Loads a data matrix, choosing sparse storage for `.mtx` files or files
/// starting with a MatrixMarket header.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let by_ext = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mtx"));
    let by_header = {
        let mut first = String::new();
        BufReader::new(File::open(path)?).read_line(&mut first)?;
        first.starts_with("%%MatrixMarket")
    };
    if by_ext || by_header {
        Ok(DataMatrix::Sparse(load_sparse(path)?))
    } else {
        Ok(DataMatrix::Dense(load_dense(path)?))
    }
}

/// Class labels remapped to `0..n_classes` in increasing order of the
/// original values.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub classes: Vec<usize>,
    pub original: Vec<i64>,
}

impl Labels {
    pub fn from_raw(raw: Vec<i64>) -> Self {
        let mut map = BTreeMap::new();
        for v in &raw {
            map.entry(*v).or_insert(0usize);
        }
        for (k, v) in map.values_mut().enumerate() {
            *v = k;
        }
        Self {
            classes: raw.iter().map(|v| map[v]).collect(),
            original: map.into_keys().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.original.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_classes()];
        for &c in &self.classes {
            s[c] += 1;
        }
        s
    }
}

pub fn read_labels<R: Read>(reader: R) -> Result<Labels> {
    let mut raw = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        raw.push(t.parse::<i64>().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("not an integer label: {t:?}"),
        })?);
    }
    Ok(Labels::from_raw(raw))
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Labels> {
    read_labels(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_matrix_market() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n1 2 3.5\n";
        let x = read_sparse(text.as_bytes()).unwrap();
        assert_eq!(x.shape(), (2, 2));
        assert_eq!(x.nnz(), 1);
        assert_eq!(x.iter().next(), Some((0, 1, 3.5)));
    }

    #[test]
    fn zero_entries_are_dropped() {
        let text = "%%MatrixMarket matrix coordinate integer general\n3 3 2\n1 1 0\n3 3 4\n";
        let x = read_sparse(text.as_bytes()).unwrap();
        assert_eq!(x.nnz(), 1);
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        let neg = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 -4\n";
        assert_eq!(line_of(read_sparse(neg.as_bytes()).unwrap_err()), 4);
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert_eq!(line_of(read_sparse(oob.as_bytes()).unwrap_err()), 3);
        let dup = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n";
        assert_eq!(line_of(read_sparse(dup.as_bytes()).unwrap_err()), 4);
        let junk = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n";
        assert_eq!(line_of(read_sparse(junk.as_bytes()).unwrap_err()), 3);
        let count = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(read_sparse(count.as_bytes()).is_err());
        let sym = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 1\n";
        assert!(read_sparse(sym.as_bytes()).is_err());
        assert!(read_sparse("".as_bytes()).is_err());
    }

    #[test]
    fn headerless_triples() {
        let x = read_sparse("# counts\n1 1 2\n3 2 5\n".as_bytes()).unwrap();
        assert_eq!(x.shape(), (3, 2));
        assert_eq!(x.nnz(), 2);
        assert!(read_sparse("1 1\n".as_bytes()).is_err());
    }

    #[test]
    fn sparse_round_trip() {
        let x = SparseMatrix::from_triplets(3, 4, vec![(0, 0, 0.1), (2, 3, 7.25), (1, 1, 1e-300)])
            .unwrap();
        let mut buf = Vec::new();
        write_sparse(&x, &mut buf).unwrap();
        assert_eq!(read_sparse(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn dense_cases() {
        let x = read_dense("# seed 3\n1,2\n3.5, 4\n\n".as_bytes()).unwrap();
        assert_eq!(x, DenseMatrix::from_rows(&[[1.0, 2.0], [3.5, 4.0]]).unwrap());
        assert_eq!(line_of(read_dense("1,2\n3\n".as_bytes()).unwrap_err()), 2);
        assert_eq!(line_of(read_dense("1,-2\n".as_bytes()).unwrap_err()), 1);
        assert!(read_dense("1,nan\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_dense(&x, &["seed 3".into()], &mut buf).unwrap();
        assert_eq!(read_dense(buf.as_slice()).unwrap(), x);
    }

    #[test]
    fn labels() {
        let l = read_labels("1\n1\n2\n2\n".as_bytes()).unwrap();
        assert_eq!(l.n_classes(), 2);
        assert_eq!(l.sizes(), vec![2, 2]);
        assert_eq!(l.classes, vec![0, 0, 1, 1]);
        let l = read_labels("7\n-1\n7\n".as_bytes()).unwrap();
        assert_eq!(l.classes, vec![1, 0, 1]);
        assert_eq!(line_of(read_labels("1\nfoo\n".as_bytes()).unwrap_err()), 2);
    }

    #[test]
    fn load_matrix_dispatches_on_format() {
        let dir = tempfile::tempdir().unwrap();
        let mtx = dir.path().join("a.mtx");
        std::fs::write(&mtx, "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n").unwrap();
        assert!(matches!(load_matrix(&mtx).unwrap(), DataMatrix::Sparse(_)));
        let csv = dir.path().join("a.csv");
        std::fs::write(&csv, "1,2\n").unwrap();
        assert!(matches!(load_matrix(&csv).unwrap(), DataMatrix::Dense(_)));
    }

    proptest! {
        // Arbitrary text must never panic the parsers.
        #[test]
        fn parsers_do_not_panic(text in "[0-9 .,%#eE+\\-\n]{0,200}") {
            let _ = read_sparse(text.as_bytes());
            let _ = read_dense(text.as_bytes());
            let _ = read_labels(text.as_bytes());
            let with_header = format!("%%MatrixMarket matrix coordinate real general\n{text}");
            let _ = read_sparse(with_header.as_bytes());
        }

        #[test]
        fn accepted_sparse_files_are_valid(
            entries in prop::collection::vec((1usize..6, 1usize..6, 0.0f64..10.0), 0..12)
        ) {
            let body: String = entries.iter().map(|(i, j, v)| format!("{i} {j} {v}\n")).collect();
            let text = format!(
                "%%MatrixMarket matrix coordinate real general\n5 5 {}\n{body}", entries.len()
            );
            if let Ok(x) = read_sparse(text.as_bytes()) {
                prop_assert!(x.values().iter().all(|v| *v > 0.0));
                prop_assert!(x.nnz() <= entries.len());
            }
        }
    }
}
