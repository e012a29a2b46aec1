//! Square compressed-sparse-row matrices over `Complex64`.
//!
//! Entries within a row are kept sorted by column, so iteration order (and
//! every floating-point reduction built on it) is deterministic.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut t = TripletBuilder::new(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            t.push(i, i, d);
        }
        t.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` pairs of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    /// All stored `(row, col, value)` triples in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[s..e].binary_search(&j) {
            Ok(p) => self.vals[s + p],
            Err(_) => C64::zero(),
        }
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::zero(); self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi = acc;
        }
    }

    /// `y += s · M x`.
    pub fn mul_vec_add(&self, s: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::zero();
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi += s * acc;
        }
    }

    /// `M · D` for a dense column-major matrix.
    pub fn mul_dense(&self, d: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.dim, d.ncols());
        for c in 0..d.ncols() {
            let col = d.column(c);
            let mut o = out.column_mut(c);
            for i in 0..self.dim {
                let mut acc = C64::zero();
                for (j, v) in self.row(i) {
                    acc += v * col[j];
                }
                o[i] = acc;
            }
        }
        out
    }

    /// `D · M` for a dense column-major matrix.
    pub fn dense_mul(&self, d: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(d.nrows(), self.dim);
        for k in 0..self.dim {
            for (j, v) in self.row(k) {
                let src = d.column(k);
                let mut dst = out.column_mut(j);
                for r in 0..d.nrows() {
                    dst[r] += src[r] * v;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut t = TripletBuilder::with_capacity(self.dim, self.nnz());
        for (i, j, v) in self.iter() {
            t.push(j, i, v.conj());
        }
        t.build()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= s;
        }
        out
    }

    /// `a · self + b · other`.
    pub fn lin_comb(&self, a: C64, other: &Self, b: C64) -> Self {
        assert_eq!(self.dim, other.dim, "lin_comb: dimension mismatch");
        let mut t = TripletBuilder::with_capacity(self.dim, self.nnz() + other.nnz());
        for (i, j, v) in self.iter() {
            t.push(i, j, a * v);
        }
        for (i, j, v) in other.iter() {
            t.push(i, j, b * v);
        }
        t.build()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul: dimension mismatch");
        let mut t = TripletBuilder::new(self.dim);
        for i in 0..self.dim {
            for (k, v) in self.row(i) {
                for (j, w) in other.row(k) {
                    t.push(i, j, v * w);
                }
            }
        }
        t.build()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for (_, j, v) in self.iter() {
            sums[j] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(i, j, v)| i == j || v == C64::zero())
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            d[(i, j)] += v;
        }
        d
    }

    pub fn from_dense(d: &DMatrix<C64>) -> Self {
        assert_eq!(d.nrows(), d.ncols(), "from_dense: matrix must be square");
        let mut t = TripletBuilder::new(d.nrows());
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != C64::zero() {
                    t.push(i, j, d[(i, j)]);
                }
            }
        }
        t.build()
    }
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self { dim, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, val: C64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, val));
    }

    pub fn build(mut self) -> CsrMatrix {
        // Stable sort keeps duplicate summation order tied to insertion order.
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = CsrMatrix { dim: self.dim, row_ptr, cols, vals };
        m.prune();
        m
    }
}

impl CsrMatrix {
    /// Drops exact zeros produced by cancellation.
    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != C64::zero()) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                if v != C64::zero() {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> CsrMatrix {
        let mut t = TripletBuilder::new(3);
        t.push(0, 1, c(1.0, 2.0));
        t.push(2, 0, c(-1.0, 0.5));
        t.push(1, 1, c(3.0, 0.0));
        t.push(0, 1, c(1.0, 0.0));
        t.build()
    }

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let m = sample();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), c(2.0, 2.0));
        assert_eq!(m.get(0, 0), C64::zero());
    }

    #[test]
    fn products_match_dense() {
        let m = sample();
        let n = m.adjoint().add(&CsrMatrix::identity(3));
        let dense = m.to_dense() * n.to_dense();
        assert_eq!(m.matmul(&n).to_dense(), dense);
        let x = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let y = m.mul_vec(&x);
        let yd = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert!((y[i] - yd[i]).norm() < 1e-14);
        }
        let d = n.to_dense();
        assert!((m.mul_dense(&d) - m.to_dense() * &d).norm() < 1e-13);
        assert!((m.dense_mul(&d) - &d * m.to_dense()).norm() < 1e-13);
    }

    #[test]
    fn cancellation_is_pruned() {
        let m = sample();
        assert_eq!(m.sub(&m).nnz(), 0);
        assert_eq!(m.hermitian_defect() > 0.0, true);
        let h = m.add(&m.adjoint());
        assert_eq!(h.hermitian_defect(), 0.0);
    }
}
