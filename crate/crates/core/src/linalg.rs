//! Minimal dense and sparse containers used by the reservoir and the learners.
//!
//! Only the handful of kernels the update rules need are provided: dot
//! products, matrix-vector products, the symmetric rank-1 update of the RLS
//! recursion and the exponential blend of the filter bank.

use crate::error::{Error, Result};

/// A fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(dot(&self.0, &other.0))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity_scaled(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `out = self * v`
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols, v.len())?;
        check_len(self.rows, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
        Ok(())
    }

    pub fn mul_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(v.as_slice(), &mut out)?;
        Ok(DenseVector(out))
    }

    /// `self -= scale * u uᵀ`, touching only the upper triangle and mirroring it,
    /// which keeps the result exactly symmetric.
    #[allow(clippy::needless_range_loop)]
    pub fn sub_sym_rank1(&mut self, u: &[f64], scale: f64) {
        let n = self.rows;
        debug_assert_eq!(self.cols, n);
        for i in 0..n {
            let ui = scale * u[i];
            for j in i..n {
                let v = self.data[i * n + j] - ui * u[j];
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    /// `self = (1 - lambda) * self + lambda * u uᵀ`
    pub fn blend_outer(&mut self, u: &[f64], lambda: f64) {
        let n = self.rows;
        debug_assert_eq!(self.cols, n);
        let keep = 1.0 - lambda;
        for i in 0..n {
            let ui = lambda * u[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (m, uj) in row.iter_mut().zip(u) {
                *m = keep * *m + ui * uj;
            }
        }
    }

    /// Replace with `(M + Mᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Square sparse matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Zero values are dropped;
    /// duplicates and out-of-range indices are rejected.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.iter().copied().filter(|t| t.2 != 0.0).collect();
        for &(r, c, v) in &entries {
            if r >= n || c >= n {
                return Err(Error::Validation { key: "W".into(), reason: format!("index ({r}, {c}) outside {n}x{n}") });
            }
            if !v.is_finite() {
                return Err(Error::Validation { key: "W".into(), reason: "non-finite entry".into() });
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        if entries.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::Validation { key: "W".into(), reason: "duplicate entry".into() });
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx: entries.iter().map(|t| t.1).collect(),
            values: entries.iter().map(|t| t.2).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }

    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n, v.len())?;
        check_len(self.n, out.len())?;
        for (r, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            *o = self.col_idx[lo..hi].iter().zip(&self.values[lo..hi]).map(|(&c, &w)| w * v[c]).sum();
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m.data[r * self.n + c] = v;
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
