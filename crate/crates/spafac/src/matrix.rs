//! Dense row-major matrices and positive diagonal metrics.
//!
//! Everything downstream (decompositions, factor scores, projections of
//! supplementary elements) runs on these two types. The matrices involved are
//! small contingency-table-sized objects, so the implementation favours
//! clarity and exact semantics over blocked kernels.

use crate::error::{Error, Result};

/// Dense real matrix with row-major storage. Constructors reject NaN and
/// infinite entries so downstream arithmetic never has to re-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must have at least one row and one column, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Matrix { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![0.0; rows * cols]).expect("zero matrix is always valid")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds an `len(columns[0]) x len(columns)` matrix from column vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return Err(Error::DimensionMismatch("no columns given".into()));
        }
        let rows = columns[0].len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "columns have inconsistent lengths".into(),
            ));
        }
        let mut values = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * cols + j] = *v;
            }
        }
        Matrix::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    /// Contiguous view of one row.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// `X v` for a column vector `v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// `X^T v` for a column vector `v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_matvec length mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let s = v[i];
            if s == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += s * self.get(i, j);
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        let values = self.values.iter().map(|v| v * factor).collect();
        Matrix::new(self.rows, self.cols, values).expect("scaling preserves validity")
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {:?} from {:?}",
                other.shape(),
                self.shape()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a - b)
            .collect();
        Matrix::new(self.rows, self.cols, values)
    }

    /// In-place rank-one update `X <- X - factor * p q^T`.
    pub fn subtract_outer(&mut self, factor: f64, p: &[f64], q: &[f64]) {
        assert_eq!(p.len(), self.rows);
        assert_eq!(q.len(), self.cols);
        for i in 0..self.rows {
            let fp = factor * p[i];
            for j in 0..self.cols {
                self.values[i * self.cols + j] -= fp * q[j];
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j);
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute entry of `self - other`; shapes must match.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Eigen-decomposition of a symmetric matrix by the cyclic Jacobi method.
    /// Returns `(eigenvalues, eigenvectors)` sorted by decreasing eigenvalue;
    /// eigenvectors are the columns of the returned matrix.
    pub fn symmetric_eigen(&self) -> Result<(Vec<f64>, Matrix)> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "symmetric_eigen needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut vecs = Matrix::identity(n);
        let scale = self.max_abs().max(1e-300);
        for _sweep in 0..100 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= scale * 1e-15 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= scale * 1e-18 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    for k in 0..n {
                        let vkp = vecs.get(k, p);
                        let vkq = vecs.get(k, q);
                        vecs.set(k, p, c * vkp - s * vkq);
                        vecs.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
        let columns: Vec<Vec<f64>> = order.iter().map(|&i| vecs.column(i)).collect();
        Ok((eigenvalues, Matrix::from_columns(&columns)?))
    }
}

/// Positive diagonal metric, the `M`/`W`/inverse-mass matrices of the GSVD.
/// Only the diagonal is stored; every entry must be strictly positive so that
/// square roots and inverses stay well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    entries: Vec<f64>,
}

impl DiagonalMetric {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch("empty diagonal metric".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if !e.is_finite() || *e <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "diagonal metric entry {i} is {e}; entries must be positive and finite"
                )));
            }
        }
        Ok(DiagonalMetric { entries })
    }

    pub fn identity(n: usize) -> Self {
        DiagonalMetric::new(vec![1.0; n]).expect("identity metric is valid")
    }

    /// Inverse-mass metric `diag(masses)^-1`, the standard CA row/column weight.
    pub fn inverse_of(masses: &[f64]) -> Result<Self> {
        DiagonalMetric::new(masses.iter().map(|m| 1.0 / m).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Applies `M^(-1/2)` to a vector: `out_i = x_i / sqrt(m_i)`.
    pub fn inv_sqrt_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.entries.len());
        x.iter()
            .zip(self.entries.iter())
            .map(|(v, m)| v / m.sqrt())
            .collect()
    }

    /// Applies `M^(1/2)` to a vector.
    pub fn sqrt_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.entries.len());
        x.iter()
            .zip(self.entries.iter())
            .map(|(v, m)| v * m.sqrt())
            .collect()
    }
}

/// `M^(1/2) X W^(1/2)` for diagonal metrics, computed as
/// `x[i][j] * sqrt(m_i * w_j)` so that exactly representable products (for
/// example `2 * 2 = 4`) stay exact.
pub fn weighted_transform(x: &Matrix, m: &DiagonalMetric, w: &DiagonalMetric) -> Result<Matrix> {
    if m.len() != x.rows() || w.len() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "metrics {}x{} do not conform to a {}x{} matrix",
            m.len(),
            w.len(),
            x.rows(),
            x.cols()
        )));
    }
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        let mi = m.entries()[i];
        for j in 0..x.cols() {
            out.set(i, j, x.get(i, j) * (mi * w.entries()[j]).sqrt());
        }
    }
    Ok(out)
}
