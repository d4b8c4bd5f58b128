//! Alternating-least-squares SVD and GSVD by power iteration with deflation,
//! plus the metric-weighted inertia (the chi-squared statistic over N for
//! correspondence-analysis inputs).

use crate::error::{Error, Result};
use crate::matrix::{weighted_transform, DiagonalMetric, Matrix};

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Plain SVD triplets from the alternating power iteration.
///
/// `p` is `I x R`, `q` is `J x R`, `delta` holds the singular values in the
/// order of extraction (non-increasing for non-degenerate spectra).
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub p: Matrix,
    pub q: Matrix,
    pub delta: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.delta.len()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// Reconstruction `P diag(delta) Q^T`.
    pub fn reconstruct(&self) -> Matrix {
        let mut out = Matrix::zeros(self.p.rows(), self.q.rows());
        for l in 0..self.rank() {
            let p = self.p.column(l);
            let q = self.q.column(l);
            out.subtract_outer(-self.delta[l], &p, &q);
        }
        out
    }
}

/// Generalized SVD triplets: the plain vectors of the weighted matrix plus the
/// generalized vectors `U = M^(-1/2) P`, `V = W^(-1/2) Q`.
#[derive(Debug, Clone)]
pub struct GsvdResult {
    pub p: Matrix,
    pub q: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub delta: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub row_metric: DiagonalMetric,
    pub col_metric: DiagonalMetric,
}

impl GsvdResult {
    pub fn rank(&self) -> usize {
        self.delta.len()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// Reconstruction `U diag(delta) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let mut out = Matrix::zeros(self.u.rows(), self.v.rows());
        for l in 0..self.rank() {
            out.subtract_outer(-self.delta[l], &self.u.column(l), &self.v.column(l));
        }
        out
    }
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Removes the components of `x` along each column in `basis` (one
/// Gram-Schmidt pass is enough here because the columns are orthonormal).
fn orthogonalize_against(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(x, b);
        for (xi, bi) in x.iter_mut().zip(b.iter()) {
            *xi -= c * bi;
        }
    }
}

/// Deterministic starting direction: one pass of `X^T X` power iteration
/// seeded with the all-ones vector, falling back to canonical basis seeds
/// when a seed lands in the null space.
fn initial_direction(x: &Matrix, scale: f64) -> Option<Vec<f64>> {
    let cols = x.cols();
    let tol = (scale * scale * 1e-14).max(1e-300);
    let try_seed = |seed: &[f64]| -> Option<Vec<f64>> {
        let mut q = x.tr_matvec(&x.matvec(seed));
        let n = l2_norm(&q);
        if n > tol {
            for v in q.iter_mut() {
                *v /= n;
            }
            Some(q)
        } else {
            None
        }
    };
    if let Some(q) = try_seed(&vec![1.0; cols]) {
        return Some(q);
    }
    for k in 0..cols {
        let mut e = vec![0.0; cols];
        e[k] = 1.0;
        if let Some(q) = try_seed(&e) {
            return Some(q);
        }
    }
    None
}

/// Picks a unit vector orthogonal to `basis` by deflating canonical basis
/// vectors and keeping the one with the largest residual.
pub(crate) fn orthonormal_completion(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        orthogonalize_against(&mut e, basis);
        let n = l2_norm(&e);
        if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
            best = Some((n, e));
        }
    }
    let (n, mut v) = best.expect("dim >= 1");
    assert!(n > 1e-8, "no orthogonal completion available");
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

/// Flips the pair so the largest-magnitude entry of `q` is positive; ties go
/// to the earliest index. Keeps results sign-deterministic.
fn apply_sign_convention(p: &mut [f64], q: &mut [f64]) {
    let mut idx = 0;
    let mut mag = 0.0;
    for (j, v) in q.iter().enumerate() {
        if v.abs() > mag {
            mag = v.abs();
            idx = j;
        }
    }
    if q[idx] < 0.0 {
        for v in p.iter_mut() {
            *v = -*v;
        }
        for v in q.iter_mut() {
            *v = -*v;
        }
    }
}

/// Rank-R SVD by power iteration with deflation.
///
/// Each dimension alternates `p <- X q`, `q <- X^T p` with unit normalization
/// on every half step and a re-orthogonalization against the accepted vectors
/// (a numerical no-op in exact arithmetic given the deflation, but it pins
/// `P^T P = I` to machine precision). The loop continues while either iterate
/// still moves by `epsilon` or more. An exhausted iteration budget flags the
/// dimension `converged = false` and the result is still returned; an all-zero
/// (sub)matrix yields zero singular values with canonical-basis vectors.
pub fn als_svd(x: &Matrix, rank: usize, epsilon: f64, max_iter: usize) -> Result<SvdResult> {
    let (nrows, ncols) = x.shape();
    if rank == 0 || rank > nrows.min(ncols) {
        return Err(Error::InvalidConfig(format!(
            "rank {rank} is outside 1..={} for a {nrows}x{ncols} matrix",
            nrows.min(ncols)
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive".into()));
    }

    let scale = x.frobenius_norm();
    let mut work = x.clone();
    let mut p_cols: Vec<Vec<f64>> = Vec::with_capacity(rank);
    let mut q_cols: Vec<Vec<f64>> = Vec::with_capacity(rank);
    let mut delta = Vec::with_capacity(rank);
    let mut iterations = Vec::with_capacity(rank);
    let mut converged = Vec::with_capacity(rank);
    let degenerate_tol = (scale * 1e-14).max(1e-300);

    for _l in 0..rank {
        let init = if work.frobenius_norm() <= degenerate_tol {
            None
        } else {
            initial_direction(&work, scale)
        };
        let Some(mut q) = init else {
            // Residual is numerically zero: complete the basis and move on.
            let p = orthonormal_completion(&p_cols, nrows);
            let q = orthonormal_completion(&q_cols, ncols);
            p_cols.push(p);
            q_cols.push(q);
            delta.push(0.0);
            iterations.push(0);
            converged.push(true);
            continue;
        };

        let mut p = vec![0.0; nrows];
        let mut iters = 0;
        let mut has_converged = false;
        let mut degenerate = false;
        for t in 0..max_iter {
            let mut p_new = work.matvec(&q);
            orthogonalize_against(&mut p_new, &p_cols);
            let pn = l2_norm(&p_new);
            if pn <= degenerate_tol {
                degenerate = true;
                break;
            }
            for v in p_new.iter_mut() {
                *v /= pn;
            }
            let mut q_new = work.tr_matvec(&p_new);
            orthogonalize_against(&mut q_new, &q_cols);
            let qn = l2_norm(&q_new);
            if qn <= degenerate_tol {
                degenerate = true;
                break;
            }
            for v in q_new.iter_mut() {
                *v /= qn;
            }
            let dp = l2_diff(&p_new, &p);
            let dq = l2_diff(&q_new, &q);
            p = p_new;
            q = q_new;
            iters = t + 1;
            if dp < epsilon && dq < epsilon {
                has_converged = true;
                break;
            }
        }
        if degenerate {
            let p = orthonormal_completion(&p_cols, nrows);
            let q = orthonormal_completion(&q_cols, ncols);
            p_cols.push(p);
            q_cols.push(q);
            delta.push(0.0);
            iterations.push(iters);
            converged.push(true);
            continue;
        }

        let d = dot(&p, &work.matvec(&q));
        apply_sign_convention(&mut p, &mut q);
        work.subtract_outer(d, &p, &q);
        p_cols.push(p);
        q_cols.push(q);
        delta.push(d);
        iterations.push(iters);
        converged.push(has_converged);
    }

    Ok(SvdResult {
        p: Matrix::from_columns(&p_cols)?,
        q: Matrix::from_columns(&q_cols)?,
        delta,
        iterations,
        converged,
    })
}

/// GSVD under diagonal metrics: runs [`als_svd`] on `M^(1/2) X W^(1/2)` and
/// maps the vectors back with `U = M^(-1/2) P`, `V = W^(-1/2) Q`.
pub fn als_gsvd(
    x: &Matrix,
    row_metric: &DiagonalMetric,
    col_metric: &DiagonalMetric,
    rank: usize,
    epsilon: f64,
    max_iter: usize,
) -> Result<GsvdResult> {
    let weighted = weighted_transform(x, row_metric, col_metric)?;
    let inner = als_svd(&weighted, rank, epsilon, max_iter)?;
    let u_cols: Vec<Vec<f64>> = (0..inner.rank())
        .map(|l| row_metric.inv_sqrt_apply(&inner.p.column(l)))
        .collect();
    let v_cols: Vec<Vec<f64>> = (0..inner.rank())
        .map(|l| col_metric.inv_sqrt_apply(&inner.q.column(l)))
        .collect();
    Ok(GsvdResult {
        u: Matrix::from_columns(&u_cols)?,
        v: Matrix::from_columns(&v_cols)?,
        p: inner.p,
        q: inner.q,
        delta: inner.delta,
        iterations: inner.iterations,
        converged: inner.converged,
        row_metric: row_metric.clone(),
        col_metric: col_metric.clone(),
    })
}

/// Metric-weighted inertia `tr(W^(1/2) X^T M X W^(1/2)) = sum m_i w_j x_ij^2`.
///
/// With inverse-mass metrics on a double-centered probability matrix this is
/// the chi-squared statistic divided by N, and it equals the sum of the
/// squared generalized singular values of the full decomposition.
pub fn inertia(x: &Matrix, row_metric: &DiagonalMetric, col_metric: &DiagonalMetric) -> Result<f64> {
    if row_metric.len() != x.rows() || col_metric.len() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "metrics {}x{} do not conform to a {}x{} matrix",
            row_metric.len(),
            col_metric.len(),
            x.rows(),
            x.cols()
        )));
    }
    let mut total = 0.0;
    for i in 0..x.rows() {
        let mi = row_metric.entries()[i];
        for j in 0..x.cols() {
            let v = x.get(i, j);
            total += mi * col_metric.entries()[j] * v * v;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal(m: &Matrix, tol: f64) {
        let gram = m.transpose().matmul(m).unwrap();
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram.get(i, j) - expected).abs() < tol,
                    "gram[{i}][{j}] = {}",
                    gram.get(i, j)
                );
            }
        }
    }

    #[test]
    fn diagonal_matrix_recovers_its_entries() {
        let x = Matrix::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let r = als_svd(&x, 2, 1e-12, 1000).unwrap();
        assert!((r.delta[0] - 2.0).abs() < 1e-10);
        assert!((r.delta[1] - 1.0).abs() < 1e-10);
        // P and Q are the identity up to sign.
        for l in 0..2 {
            let p = r.p.column(l);
            let q = r.q.column(l);
            assert!((p[l].abs() - 1.0).abs() < 1e-8);
            assert!((q[l].abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn all_zero_matrix_yields_zero_spectrum_and_canonical_basis() {
        let x = Matrix::zeros(3, 3);
        let r = als_svd(&x, 3, 1e-9, 100).unwrap();
        assert_eq!(r.delta, vec![0.0, 0.0, 0.0]);
        assert_eq!(r.p, Matrix::identity(3));
        assert_eq!(r.q, Matrix::identity(3));
        assert!(r.all_converged());
    }

    #[test]
    fn full_rank_reconstruction_within_1e8() {
        // Fixed pseudo-random 5x4 matrix.
        let vals: Vec<f64> = (0..20)
            .map(|k| ((k * 2654435761_u64 as usize) % 97) as f64 / 17.0 - 2.5)
            .collect();
        let x = Matrix::new(5, 4, vals).unwrap();
        let r = als_svd(&x, 4, 1e-12, 5000).unwrap();
        assert!(r.all_converged());
        assert!(x.max_abs_diff(&r.reconstruct()) < 1e-8);
        assert_orthonormal(&r.p, 1e-10);
        assert_orthonormal(&r.q, 1e-10);
        for w in r.delta.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "delta not non-increasing: {:?}", r.delta);
        }
    }

    #[test]
    fn identity_metrics_match_plain_svd() {
        let x = Matrix::new(3, 2, vec![1.0, 2.0, -0.5, 0.25, 3.0, -1.0]).unwrap();
        let plain = als_svd(&x, 2, 1e-12, 2000).unwrap();
        let eye_r = DiagonalMetric::identity(3);
        let eye_c = DiagonalMetric::identity(2);
        let gen = als_gsvd(&x, &eye_r, &eye_c, 2, 1e-12, 2000).unwrap();
        for l in 0..2 {
            assert!((plain.delta[l] - gen.delta[l]).abs() < 1e-10);
        }
        assert!(gen.u.max_abs_diff(&gen.p) < 1e-12);
        assert!(gen.v.max_abs_diff(&gen.q) < 1e-12);
    }

    #[test]
    fn perfect_association_table_has_unit_singular_value() {
        // Double-centered probability matrix of [[10, 0], [0, 10]] with metrics
        // diag(2, 2): the weighted matrix is [[.5, -.5], [-.5, .5]].
        let x = Matrix::new(2, 2, vec![0.25, -0.25, -0.25, 0.25]).unwrap();
        let m = DiagonalMetric::new(vec![2.0, 2.0]).unwrap();
        let r = als_gsvd(&x, &m, &m, 1, 1e-12, 1000).unwrap();
        assert!((r.delta[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_vectors_are_metric_orthonormal() {
        let vals: Vec<f64> = (0..24)
            .map(|k| (((k * 7 + 3) % 13) as f64) / 3.0 - 2.0)
            .collect();
        let x = Matrix::new(6, 4, vals).unwrap();
        let m = DiagonalMetric::new(vec![0.5, 1.5, 2.0, 0.25, 3.0, 1.0]).unwrap();
        let w = DiagonalMetric::new(vec![1.25, 0.75, 2.5, 0.4]).unwrap();
        let r = als_gsvd(&x, &m, &w, 4, 1e-12, 5000).unwrap();
        // U^T M U = I within 1e-10, checked entrywise.
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for i in 0..6 {
                    s += r.u.get(i, a) * m.entries()[i] * r.u.get(i, b);
                }
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "U^T M U [{a}][{b}] = {s}");
            }
        }
        // Reconstruction through the generalized vectors.
        assert!(x.max_abs_diff(&r.reconstruct()) < 1e-8);
        // Inertia identity: sum delta^2 equals the weighted inertia.
        let sum_sq: f64 = r.delta.iter().map(|d| d * d).sum();
        assert!((sum_sq - inertia(&x, &m, &w).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn inertia_of_zero_matrix_is_zero() {
        let x = Matrix::zeros(3, 2);
        let m = DiagonalMetric::identity(3);
        let w = DiagonalMetric::identity(2);
        assert_eq!(inertia(&x, &m, &w).unwrap(), 0.0);
    }

    #[test]
    fn inertia_rejects_mismatched_metrics() {
        let x = Matrix::zeros(3, 2);
        let m = DiagonalMetric::identity(2);
        let w = DiagonalMetric::identity(2);
        assert!(inertia(&x, &m, &w).is_err());
    }

    #[test]
    fn nonconvergence_is_flagged_not_fatal() {
        let vals: Vec<f64> = (0..30).map(|k| ((k % 7) as f64) - 3.0).collect();
        let x = Matrix::new(6, 5, vals).unwrap();
        let r = als_svd(&x, 3, 1e-15, 2).unwrap();
        assert!(!r.all_converged());
        assert_eq!(r.delta.len(), 3);
    }
}
