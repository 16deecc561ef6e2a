//! Sparse and banded linear algebra used by the finite element layer.
//!
//! Tensor-grid operators have a fixed bandwidth under lexicographic node ordering, so
//! every solve goes through a banded LU with partial pivoting. Hessians of the penalized
//! energy are indefinite at saddle points, which rules out a plain Cholesky.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular at pivot {0}")]
    Singular(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of bounds");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_raw(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(row_ptr.len(), nrows + 1);
        assert_eq!(col_idx.len(), values.len());
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), diag.len(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[s..e].iter().copied().zip(self.values[s..e].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[s..e].binary_search(&j) {
            Ok(k) => self.values[s + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, beta * v)));
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Kronecker product `self ⊗ other`; row index is `i_self * other.nrows + i_other`.
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                t.push((i * other.nrows + k, j * other.ncols + l, a * b));
            }
        }
        CsrMatrix::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, &t)
    }

    /// Restriction to the given rows and columns, renumbered in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (ni, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                let nj = col_map[j];
                if nj != usize::MAX {
                    t.push((ni, nj, v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &t)
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        self.triplets().into_iter().all(|(i, j, v)| (v - self.get(j, i)).abs() <= tol * (1.0 + v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }
}

/// Square band matrix with equal lower and upper bandwidth, stored with room for the
/// fill-in created by partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let width = 3 * bw + 1;
        Self { n, bw, width, data: vec![0.0; n * width] }
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut b = Self::zeros(a.nrows(), a.bandwidth());
        b.add_csr(1.0, a);
        b
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + 2 * self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Adds `alpha * a`; `a` must fit inside the band.
    pub fn add_csr(&mut self, alpha: f64, a: &CsrMatrix) {
        assert_eq!(a.nrows(), self.n);
        for i in 0..self.n {
            for (j, v) in a.row(i) {
                assert!(i.abs_diff(j) <= self.bw, "entry ({i},{j}) outside band {}", self.bw);
                let k = self.idx(i, j);
                self.data[k] += alpha * v;
            }
        }
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        for (i, &v) in d.iter().enumerate() {
            let k = self.idx(i, i);
            self.data[k] += v;
        }
    }

    /// LU factorization with partial pivoting (row interchanges).
    pub fn factor(mut self) -> Result<BandedLu, LinalgError> {
        let (n, kl) = (self.n, self.bw);
        let mut lmul = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::Singular(k));
            }
            piv[k] = p;
            let jmax = (k + 2 * kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = 0.0;
                lmul[k * kl + (i - k - 1)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu { band: self, lmul, piv })
    }
}

/// Factorization produced by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    band: BandMatrix,
    lmul: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.band.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.band.n, self.band.bw);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    x[i] -= self.lmul[k * kl + (i - k - 1)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + 2 * kl).min(n - 1) {
                s -= self.band.data[self.band.idx(k, j)] * x[j];
            }
            x[k] = s / self.band.data[self.band.idx(k, k)];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Norm weighted by the inverse of a positive diagonal: `sqrt(Σ g_i² / w_i)`.
pub fn inv_weighted_norm(g: &[f64], w: &[f64]) -> f64 {
    g.iter().zip(w).map(|(gi, wi)| gi * gi / wi).sum::<f64>().sqrt()
}
