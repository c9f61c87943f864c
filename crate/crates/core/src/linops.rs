//! Dense and CSR linear operators.

use serde::{Deserialize, Serialize};

use crate::vector::{check_len, dot, norm};
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(row, cols)?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Validates and wraps raw CSR arrays.
    ///
    /// `indptr` must have `rows + 1` non-decreasing entries starting at 0 and
    /// ending at `nnz`; every column index must be below `cols`.
    pub fn new(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != rows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row pointer array has length {}, expected {}",
                indptr.len(),
                rows + 1
            )));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidCsr(format!(
                "{} column indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indptr[0] != 0 {
            return Err(Error::InvalidCsr("first row pointer must be 0".into()));
        }
        if indptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidCsr(
                "row pointers must be non-decreasing".into(),
            ));
        }
        if indptr[rows] != values.len() {
            return Err(Error::InvalidCsr(format!(
                "final row pointer {} does not equal nnz {}",
                indptr[rows],
                values.len()
            )));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= cols) {
            return Err(Error::InvalidCsr(format!(
                "column index {j} out of range for {cols} columns"
            )));
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Keeps the exact nonzeros of a dense matrix.
    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(dense.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..dense.rows {
            for (j, &v) in dense.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(values.len());
        }
        Self {
            rows: dense.rows,
            cols: dense.cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.data[i * self.cols + self.indices[p]] += self.values[p];
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The coupling operator `K : R^cols -> R^rows`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LinearMap {
    Dense(DenseMatrix),
    Csr(CsrMatrix),
}

impl From<DenseMatrix> for LinearMap {
    fn from(m: DenseMatrix) -> Self {
        LinearMap::Dense(m)
    }
}

impl From<CsrMatrix> for LinearMap {
    fn from(m: CsrMatrix) -> Self {
        LinearMap::Csr(m)
    }
}

impl LinearMap {
    pub fn rows(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.rows,
            LinearMap::Csr(m) => m.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.cols,
            LinearMap::Csr(m) => m.cols,
        }
    }

    /// Number of stored entries (`rows * cols` for dense storage).
    pub fn stored_entries(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.data.len(),
            LinearMap::Csr(m) => m.nnz(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LinearMap::Dense(m) => m.clone(),
            LinearMap::Csr(m) => m.to_dense(),
        }
    }

    /// Returns `Kx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.cols())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Returns `K^T y`.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(y, self.rows())?;
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(y, &mut out);
        Ok(out)
    }

    /// Writes `Kx` into `out`. Lengths are the caller's responsibility.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        match self {
            LinearMap::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = dot(m.row(i), x);
                }
            }
            LinearMap::Csr(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let (start, end) = (m.indptr[i], m.indptr[i + 1]);
                    *o = m.indices[start..end]
                        .iter()
                        .zip(&m.values[start..end])
                        .map(|(&j, &v)| v * x[j])
                        .sum();
                }
            }
        }
    }

    /// Writes `K^T y` into `out`. Lengths are the caller's responsibility.
    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        out.fill(0.0);
        match self {
            LinearMap::Dense(m) => {
                for (i, &yi) in y.iter().enumerate() {
                    if yi == 0.0 {
                        continue;
                    }
                    for (o, &k) in out.iter_mut().zip(m.row(i)) {
                        *o += k * yi;
                    }
                }
            }
            LinearMap::Csr(m) => {
                for (i, &yi) in y.iter().enumerate() {
                    for p in m.indptr[i]..m.indptr[i + 1] {
                        out[m.indices[p]] += m.values[p] * yi;
                    }
                }
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let values = match self {
            LinearMap::Dense(m) => &m.data,
            LinearMap::Csr(m) => &m.values,
        };
        norm(values)
    }

    /// Estimates the spectral norm `sqrt(lambda_max(K^T K))` by power
    /// iteration on `K^T K`.
    ///
    /// The start vector is the normalized all-ones vector, so the result is
    /// deterministic. Iteration stops once the Rayleigh quotient changes by
    /// less than `tol / 10` relative between sweeps. The zero map returns 0.
    pub fn operator_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {tol}"
            )));
        }
        let n = self.cols();
        if n == 0 || self.rows() == 0 || self.frobenius_norm() == 0.0 {
            return Ok(0.0);
        }
        let mut kv = vec![0.0; self.rows()];
        let mut w = vec![0.0; n];

        let ones = vec![1.0 / (n as f64).sqrt(); n];
        // Fallback start in case the all-ones vector lies in the null space of K.
        let fallback: Vec<f64> = {
            let v: Vec<f64> = (0..n)
                .map(|i| 1.0 + ((i * 7 + 3) % 11) as f64 / 11.0)
                .collect();
            let s = norm(&v);
            v.into_iter().map(|t| t / s).collect()
        };

        for start in [ones, fallback] {
            let mut v = start;
            let mut estimate = 0.0;
            let mut converged = false;
            for _ in 0..max_iter {
                self.apply_into(&v, &mut kv);
                // Rayleigh quotient of K^T K at unit v is ||Kv||^2.
                let lambda = dot(&kv, &kv);
                if lambda == 0.0 {
                    break;
                }
                self.apply_transpose_into(&kv, &mut w);
                let wn = norm(&w);
                for (vi, wi) in v.iter_mut().zip(&w) {
                    *vi = wi / wn;
                }
                if (lambda - estimate).abs() <= 0.1 * tol * lambda {
                    estimate = lambda;
                    converged = true;
                    break;
                }
                estimate = lambda;
            }
            if converged {
                return Ok(estimate.sqrt());
            }
            if estimate > 0.0 {
                return Err(Error::NormNotConverged {
                    iterations: max_iter,
                    estimate: estimate.sqrt(),
                });
            }
        }
        Err(Error::NormNotConverged {
            iterations: max_iter,
            estimate: 0.0,
        })
    }
}
