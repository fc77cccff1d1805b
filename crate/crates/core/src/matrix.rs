//! Dense and sparse nonnegative matrix containers and the kernels shared by
//! every solver path.
//!
//! Dense matrices are row-major. Sparse matrices keep their entries sorted
//! row-major in a compressed-row layout so that both the Frobenius and the KL
//! updates can stream the support one row at a time.

use std::cell::Cell;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};

/// Entry floor applied after every multiplicative update.
pub const EPS_FLOOR: f64 = 1e-16;

// Below this many multiply-adds a kernel runs on the calling thread.
const PAR_THRESHOLD: usize = 1 << 16;

thread_local! {
    static PEAK_DENSE_LEN: Cell<usize> = const { Cell::new(0) };
}

fn note_alloc(len: usize) {
    PEAK_DENSE_LEN.with(|p| {
        if len > p.get() {
            p.set(len)
        }
    });
}

/// Largest dense buffer (in entries) allocated on this thread since the last
/// [`reset_peak_dense_len`]. Lets callers check that a sparse solve never
/// materializes an `m x n` product.
pub fn peak_dense_len() -> usize {
    PEAK_DENSE_LEN.with(Cell::get)
}

pub fn reset_peak_dense_len() {
    PEAK_DENSE_LEN.with(|p| p.set(0));
}

/// Row-major dense matrix of reals.
#[derive(PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Clone for DenseMatrix {
    fn clone(&self) -> Self {
        note_alloc(self.values.len());
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.clone(),
        }
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        note_alloc(rows * cols);
        Self {
            rows,
            cols,
            values: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return dim_err(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                values.len()
            ));
        }
        note_alloc(values.len());
        Ok(Self { rows, cols, values })
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return dim_err(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            values.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, values)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.values[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.sum() / self.values.len() as f64
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }

    /// Replaces every entry with `max(floor, entry)`.
    pub fn floor_at(&mut self, floor: f64) {
        for v in &mut self.values {
            *v = v.max(floor);
        }
    }

    /// Largest absolute entrywise difference divided by the largest absolute
    /// entry of `self` (or 1 when `self` is zero).
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if scale == f64::MIN_POSITIVE {
            diff
        } else {
            diff / scale
        }
    }
}

/// Dense product `a * b`.
///
/// Each output entry accumulates over the inner index in increasing order, so
/// `matmul(a, b)` and `matmul(bᵀ, aᵀ)ᵀ` agree bitwise.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return dim_err(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let (m, inner, n) = (a.rows, a.cols, b.cols);
    let mut out = DenseMatrix::zeros(m, n);
    if n == 0 {
        return Ok(out);
    }
    let kernel = |(i, row): (usize, &mut [f64])| {
        let arow = &a.values[i * inner..(i + 1) * inner];
        for (k, &aik) in arow.iter().enumerate() {
            let brow = &b.values[k * n..(k + 1) * n];
            for (c, &bkj) in row.iter_mut().zip(brow) {
                *c += aik * bkj;
            }
        }
    };
    if m * inner * n >= PAR_THRESHOLD {
        out.values.par_chunks_mut(n).enumerate().for_each(kernel);
    } else {
        out.values.chunks_mut(n).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// `aᵀ * b` without forming the transpose of `a`.
pub fn matmul_tn(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows != b.rows {
        return dim_err(format!(
            "cannot multiply ({}x{})ᵀ by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let (inner, m, n) = (a.rows, a.cols, b.cols);
    let mut out = DenseMatrix::zeros(m, n);
    if n == 0 {
        return Ok(out);
    }
    let kernel = |(k, row): (usize, &mut [f64])| {
        for i in 0..inner {
            let aik = a.values[i * m + k];
            let brow = &b.values[i * n..(i + 1) * n];
            for (c, &bij) in row.iter_mut().zip(brow) {
                *c += aik * bij;
            }
        }
    };
    if m * inner * n >= PAR_THRESHOLD {
        out.values.par_chunks_mut(n).enumerate().for_each(kernel);
    } else {
        out.values.chunks_mut(n).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// Column sums of `a` as a vector of length `a.cols()`.
pub fn col_sums(a: &DenseMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; a.cols];
    for i in 0..a.rows {
        for (s, v) in sums.iter_mut().zip(a.row(i)) {
            *s += v;
        }
    }
    sums
}

/// Row sums of `a` as a vector of length `a.rows()`.
pub fn row_sums(a: &DenseMatrix) -> Vec<f64> {
    (0..a.rows).map(|i| a.row(i).iter().sum()).collect()
}

/// Sparse nonnegative matrix in compressed-row form with strictly positive
/// stored values, sorted row-major and duplicate-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets in any order.
    ///
    /// Values must be finite and strictly positive; repeated coordinates are
    /// rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= rows || j >= cols {
                return dim_err(format!("entry ({i}, {j}) outside a {rows}x{cols} matrix"));
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "stored value {v} at ({i}, {j}) is not finite and positive"
                )));
            }
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = triplets
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidArgument(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &triplets {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = triplets.iter().map(|t| t.1).collect();
        let values = triplets.iter().map(|t| t.2).collect();
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Keeps the strictly positive entries of a dense matrix.
    pub fn from_dense(d: &DenseMatrix) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..d.rows {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "negative entry {v} at ({i}, {j})"
                    )));
                }
                if v > 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(d.rows, d.cols, t)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of stored nonzeros.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let t = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, t).expect("transpose of a valid matrix")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// `(WH)_{ij}` at every stored position of `x`, in row-major storage order.
/// Costs `O(nnz * r)`.
pub fn wh_at_support(w: &DenseMatrix, h: &DenseMatrix, x: &SparseMatrix) -> Result<Vec<f64>> {
    if w.cols != h.rows || w.rows != x.rows || h.cols != x.cols {
        return dim_err(format!(
            "factors {}x{} * {}x{} do not match a {}x{} target",
            w.rows, w.cols, h.rows, h.cols, x.rows, x.cols
        ));
    }
    let (r, n) = (w.cols, h.cols);
    let mut out = Vec::with_capacity(x.nnz());
    for i in 0..x.rows {
        let wrow = w.row(i);
        let (cols, _) = x.row(i);
        for &j in cols {
            let mut acc = 0.0;
            for (k, &wik) in wrow.iter().enumerate() {
                acc += wik * h.values[k * n + j];
            }
            out.push(acc);
        }
        debug_assert_eq!(wrow.len(), r);
    }
    Ok(out)
}

/// `Wᵀ S` where `S` has the sparsity pattern of `pattern` and the stored
/// values `vals` (in storage order). Output is `r x n`.
pub(crate) fn tmul_pattern(w: &DenseMatrix, pattern: &SparseMatrix, vals: &[f64]) -> DenseMatrix {
    let (r, n) = (w.cols, pattern.cols);
    let mut out = DenseMatrix::zeros(r, n);
    let mut pos = 0;
    for i in 0..pattern.rows {
        let wrow = w.row(i);
        let (cols, _) = pattern.row(i);
        for &j in cols {
            let s = vals[pos];
            pos += 1;
            for (k, &wik) in wrow.iter().enumerate() {
                out.values[k * n + j] += wik * s;
            }
        }
    }
    out
}

/// Borrowed view of a data matrix of either storage kind.
#[derive(Debug, Clone, Copy)]
pub enum DataRef<'a> {
    Dense(&'a DenseMatrix),
    Sparse(&'a SparseMatrix),
}

impl DataRef<'_> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            DataRef::Dense(d) => d.shape(),
            DataRef::Sparse(s) => s.shape(),
        }
    }

    pub fn transpose(&self) -> DataMatrix {
        match self {
            DataRef::Dense(d) => DataMatrix::Dense(d.transpose()),
            DataRef::Sparse(s) => DataMatrix::Sparse(s.transpose()),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DataRef::Sparse(_))
    }
}

/// Owned data matrix of either storage kind.
#[derive(Debug, Clone, PartialEq)]
pub enum DataMatrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl DataMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.as_data().shape()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DataMatrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            DataMatrix::Dense(d) => d.clone(),
            DataMatrix::Sparse(s) => s.to_dense(),
        }
    }
}

/// Anything that can be viewed as a data matrix.
pub trait AsData {
    fn as_data(&self) -> DataRef<'_>;
}

impl AsData for DenseMatrix {
    fn as_data(&self) -> DataRef<'_> {
        DataRef::Dense(self)
    }
}

impl AsData for SparseMatrix {
    fn as_data(&self) -> DataRef<'_> {
        DataRef::Sparse(self)
    }
}

impl AsData for DataMatrix {
    fn as_data(&self) -> DataRef<'_> {
        match self {
            DataMatrix::Dense(d) => DataRef::Dense(d),
            DataMatrix::Sparse(s) => DataRef::Sparse(s),
        }
    }
}

impl AsData for DataRef<'_> {
    fn as_data(&self) -> DataRef<'_> {
        *self
    }
}

impl From<DenseMatrix> for DataMatrix {
    fn from(d: DenseMatrix) -> Self {
        DataMatrix::Dense(d)
    }
}

impl From<SparseMatrix> for DataMatrix {
    fn from(s: SparseMatrix) -> Self {
        DataMatrix::Sparse(s)
    }
}

/// Nonnegative factors `W` (`m x r`) and `H` (`r x n`) with every entry at
/// least [`EPS_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
}

impl FactorPair {
    /// Checks the inner dimension and raises every entry to the floor.
    pub fn new(mut w: DenseMatrix, mut h: DenseMatrix) -> Result<Self> {
        if w.cols != h.rows {
            return dim_err(format!(
                "W is {}x{} but H is {}x{}",
                w.rows, w.cols, h.rows, h.cols
            ));
        }
        if w.cols == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if !w.values.iter().chain(&h.values).all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidArgument(
                "factor entries must be finite and nonnegative".into(),
            ));
        }
        w.floor_at(EPS_FLOOR);
        h.floor_at(EPS_FLOOR);
        Ok(Self { w, h })
    }

    pub fn rank(&self) -> usize {
        self.w.cols
    }

    /// Fails unless `W H` has the shape of the target.
    pub fn check_target(&self, shape: (usize, usize)) -> Result<()> {
        if (self.w.rows, self.h.cols) != shape {
            return dim_err(format!(
                "factors produce {}x{} but the data is {}x{}",
                self.w.rows, self.h.cols, shape.0, shape.1
            ));
        }
        Ok(())
    }

    pub fn product(&self) -> DenseMatrix {
        matmul(&self.w, &self.h).expect("factor shapes checked at construction")
    }

    pub fn min_entry(&self) -> f64 {
        self.w.min_value().min(self.h.min_value())
    }
}
