//! Group-sparse generalized SVD: alternating power iteration whose half-steps
//! are projected onto the intersection of the unit sphere, a group-norm ball,
//! and the orthocomplement of the previously accepted vectors.

use crate::als::{als_svd, dot, l2_diff, GsvdResult};
use crate::error::{Error, Result};
use crate::matrix::{weighted_transform, DiagonalMetric, Matrix};
use crate::projectors::{
    pocs_project_saturated, ConstraintResiduals, OrthoBasis, PocsPriority, SparsityConstraint,
    DEFAULT_POCS_EPSILON, DEFAULT_POCS_MAX_CYCLES,
};

/// Residual bound under which a dimension's constraints count as satisfied.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Permitted per-step objective decrease inside the alternating loop.
pub const OBJECTIVE_SLACK: f64 = 1e-9;

fn within_tolerance(r: &ConstraintResiduals) -> bool {
    r.orthogonality <= CONSTRAINT_TOL
        && r.group_excess <= CONSTRAINT_TOL
        && r.l2_excess <= CONSTRAINT_TOL
}

/// Inputs of the sparse decomposition: per-dimension sparsity constraints for
/// both sides, the row/column metrics, and the alternating-loop controls.
#[derive(Debug, Clone)]
pub struct SparseGsvdConfig {
    pub rank: usize,
    pub row_constraints: Vec<SparsityConstraint>,
    pub col_constraints: Vec<SparsityConstraint>,
    pub row_metric: DiagonalMetric,
    pub col_metric: DiagonalMetric,
    pub epsilon: f64,
    pub max_iter: usize,
    pub priority: PocsPriority,
}

impl SparseGsvdConfig {
    /// Same radius and group structure on every dimension.
    pub fn uniform(
        rank: usize,
        row_constraint: SparsityConstraint,
        col_constraint: SparsityConstraint,
        row_metric: DiagonalMetric,
        col_metric: DiagonalMetric,
    ) -> Self {
        SparseGsvdConfig {
            rank,
            row_constraints: vec![row_constraint; rank],
            col_constraints: vec![col_constraint; rank],
            row_metric,
            col_metric,
            epsilon: crate::als::DEFAULT_EPSILON,
            max_iter: crate::als::DEFAULT_MAX_ITER,
            priority: PocsPriority::SparsityLast,
        }
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rank == 0 || self.rank > rows.min(cols) {
            return Err(Error::InvalidConfig(format!(
                "rank {} is outside 1..={} for a {rows}x{cols} matrix",
                self.rank,
                rows.min(cols)
            )));
        }
        if self.row_constraints.len() != self.rank || self.col_constraints.len() != self.rank {
            return Err(Error::InvalidConfig(format!(
                "constraint lists must have length {} (the rank)",
                self.rank
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if self.row_metric.len() != rows || self.col_metric.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "metrics {}x{} do not conform to a {rows}x{cols} matrix",
                self.row_metric.len(),
                self.col_metric.len()
            )));
        }
        for (dim, side, constraints) in [
            (rows, "row", &self.row_constraints),
            (cols, "column", &self.col_constraints),
        ] {
            let max = (dim as f64).sqrt();
            for c in constraints.iter() {
                if c.radius < 1.0 - 1e-12 || c.radius > max + 1e-9 {
                    return Err(Error::InvalidRadius {
                        radius: c.radius,
                        max,
                    });
                }
                c.check_len(dim).map_err(|_| {
                    Error::InvalidConfig(format!(
                        "{side} partition does not cover the {side} coordinates"
                    ))
                })?;
            }
        }
        Ok(())
    }
}

/// Per-dimension diagnostics of the alternating loop.
#[derive(Debug, Clone)]
pub struct DimensionDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each full alternating step (feasible iterates).
    pub objective_path: Vec<f64>,
    pub row_residuals: ConstraintResiduals,
    pub col_residuals: ConstraintResiduals,
}

/// Result of the group-sparse decomposition. Columns are reordered by
/// decreasing pseudo-singular value; `estimation_order[k]` records which
/// alternating pass produced reordered column `k`, because the orthogonality
/// bases (and therefore the transition formulas) are defined in estimation
/// order, not display order.
#[derive(Debug, Clone)]
pub struct SparseGsvdResult {
    pub p: Matrix,
    pub q: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub delta_hat: Vec<f64>,
    pub estimation_order: Vec<usize>,
    pub dimensions: Vec<DimensionDiagnostics>,
    pub row_metric: DiagonalMetric,
    pub col_metric: DiagonalMetric,
    /// Constraints indexed by original estimation pass (not display order),
    /// kept so the transition formulas can replay the exact projector.
    pub row_constraints: Vec<SparsityConstraint>,
    pub col_constraints: Vec<SparsityConstraint>,
    pub priority: PocsPriority,
}

impl SparseGsvdResult {
    pub fn rank(&self) -> usize {
        self.delta_hat.len()
    }

    pub fn all_converged(&self) -> bool {
        self.dimensions.iter().all(|d| d.converged)
    }

    /// Exact zeros in the first `l` columns of P.
    pub fn zero_count_p(&self, l: usize) -> usize {
        count_zeros(&self.p, l)
    }

    /// Exact zeros in the first `l` columns of Q.
    pub fn zero_count_q(&self, l: usize) -> usize {
        count_zeros(&self.q, l)
    }

    /// Pseudo-singular values in the order the dimensions were estimated.
    pub fn delta_hat_estimation_order(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rank()];
        for (k, &orig) in self.estimation_order.iter().enumerate() {
            out[orig] = self.delta_hat[k];
        }
        out
    }

    /// Orthogonality bases for reordered dimension `k`: the P (or Q) columns
    /// whose alternating pass came before `k`'s, in estimation order.
    pub fn bases_before(&self, k: usize) -> Result<(OrthoBasis, OrthoBasis)> {
        if k >= self.rank() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {k} is outside 0..{}",
                self.rank()
            )));
        }
        if self.estimation_order.len() != self.rank() {
            return Err(Error::OrderUnavailable);
        }
        let own = self.estimation_order[k];
        let mut order: Vec<usize> = (0..self.rank())
            .filter(|&j| self.estimation_order[j] < own)
            .collect();
        order.sort_by_key(|&j| self.estimation_order[j]);
        let mut p_basis = OrthoBasis::empty(self.p.rows());
        let mut q_basis = OrthoBasis::empty(self.q.rows());
        for &j in &order {
            p_basis.push_unchecked(self.p.column(j));
            q_basis.push_unchecked(self.q.column(j));
        }
        Ok((p_basis, q_basis))
    }

    /// Rank-R reconstruction `U diag(delta_hat) V^T`; only approximate under
    /// active sparsity.
    pub fn reconstruct(&self) -> Matrix {
        let mut out = Matrix::zeros(self.u.rows(), self.v.rows());
        for l in 0..self.rank() {
            out.subtract_outer(-self.delta_hat[l], &self.u.column(l), &self.v.column(l));
        }
        out
    }
}

fn count_zeros(m: &Matrix, l: usize) -> usize {
    let mut zeros = 0;
    for j in 0..l.min(m.cols()) {
        for i in 0..m.rows() {
            if m.get(i, j) == 0.0 {
                zeros += 1;
            }
        }
    }
    zeros
}

/// Group-sparse GSVD of `X`.
///
/// Forms the weighted matrix `M^(1/2) X W^(1/2)`, then for each dimension
/// alternates projected half-steps `p <- proj(X~ q)`, `q <- proj(X~^T p)`
/// until neither iterate moves by `epsilon` or more. The projection lands on
/// the intersection of the unit sphere, the group-norm ball, and the
/// orthocomplement of the accepted vectors, so converged columns are
/// orthonormal with exact zero patterns. Dimensions are initialized from the
/// plain decomposition of the weighted matrix and finally reordered by
/// decreasing pseudo-singular value, with the estimation order recorded.
pub fn gsgsvd(x: &Matrix, cfg: &SparseGsvdConfig) -> Result<SparseGsvdResult> {
    let (rows, cols) = x.shape();
    cfg.validate(rows, cols)?;
    let weighted = weighted_transform(x, &cfg.row_metric, &cfg.col_metric)?;
    let plain = als_svd(&weighted, cfg.rank, cfg.epsilon, cfg.max_iter)?;

    let mut p_basis = OrthoBasis::empty(rows);
    let mut q_basis = OrthoBasis::empty(cols);
    let mut p_cols = Vec::with_capacity(cfg.rank);
    let mut q_cols = Vec::with_capacity(cfg.rank);
    let mut delta_hat = Vec::with_capacity(cfg.rank);
    let mut diagnostics = Vec::with_capacity(cfg.rank);

    for l in 0..cfg.rank {
        let row_c = &cfg.row_constraints[l];
        let col_c = &cfg.col_constraints[l];
        let mut p = plain.p.column(l);
        let mut q = plain.q.column(l);
        let mut objective_path = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        let mut projections_converged = true;
        let mut row_residuals = ConstraintResiduals::default();
        let mut col_residuals = ConstraintResiduals::default();

        let infeasible = |e: Error| match e {
            Error::InfeasibleConstraints { .. } => Error::InfeasibleConstraints { dimension: l },
            other => other,
        };

        let mut p_converged = true;
        let mut q_converged = true;
        for t in 0..cfg.max_iter {
            let p_prev = p.clone();
            let q_prev = q.clone();
            let z_p = weighted.matvec(&q);
            let p_step = pocs_project_saturated(
                &z_p,
                row_c,
                &p_basis,
                cfg.priority,
                DEFAULT_POCS_EPSILON,
                DEFAULT_POCS_MAX_CYCLES,
            )
            .map_err(infeasible)?;
            // Ascent safeguard: the cyclic projection limit is a heuristic
            // maximizer, so between feasible iterates (t >= 1) a candidate
            // that lowers the objective by more than the monotonicity slack
            // is rejected in favour of standing still.
            let old_p_score = dot(&p, &z_p);
            let p_rejected = t > 0 && dot(&p_step.x, &z_p) < old_p_score - OBJECTIVE_SLACK;
            if !p_rejected {
                p = p_step.x;
                p_converged = p_step.converged;
                row_residuals = p_step.residuals;
            }
            let z_q = weighted.tr_matvec(&p);
            let q_step = pocs_project_saturated(
                &z_q,
                col_c,
                &q_basis,
                cfg.priority,
                DEFAULT_POCS_EPSILON,
                DEFAULT_POCS_MAX_CYCLES,
            )
            .map_err(infeasible)?;
            let old_q_score = dot(&q, &z_q);
            let q_rejected = t > 0 && dot(&q_step.x, &z_q) < old_q_score - OBJECTIVE_SLACK;
            if !q_rejected {
                q = q_step.x;
                q_converged = q_step.converged;
                col_residuals = q_step.residuals;
            }
            let dp = l2_diff(&p, &p_prev);
            let dq = l2_diff(&q, &q_prev);
            projections_converged = p_converged && q_converged;
            objective_path.push(dot(&p, &weighted.matvec(&q)));
            iterations = t + 1;
            if dp < cfg.epsilon && dq < cfg.epsilon {
                // A genuine fixed point requires the final updates to have
                // been accepted; exiting on a rejection would freeze a stale
                // state whose replayed update moves elsewhere.
                converged = !p_rejected && !q_rejected;
                break;
            }
        }

        let delta = dot(&p, &weighted.matvec(&q));
        // Sign convention: largest-magnitude entry of q positive.
        let mut idx = 0;
        let mut mag = 0.0;
        for (j, v) in q.iter().enumerate() {
            if v.abs() > mag {
                mag = v.abs();
                idx = j;
            }
        }
        if mag > 0.0 && q[idx] < 0.0 {
            for v in p.iter_mut() {
                *v = -*v;
            }
            for v in q.iter_mut() {
                *v = -*v;
            }
        }

        p_basis.push_unchecked(p.clone());
        q_basis.push_unchecked(q.clone());
        p_cols.push(p);
        q_cols.push(q);
        delta_hat.push(delta);
        // The cyclic projection can stabilize at a point outside the
        // intersection (the prioritized constraint then holds at the expense
        // of the others), so a dimension only counts as converged when the
        // outer iterates stabilized, the projection cycles met their own
        // tolerance, and the final residuals clear the feasibility bar.
        let feasible = within_tolerance(&row_residuals) && within_tolerance(&col_residuals);
        diagnostics.push(DimensionDiagnostics {
            iterations,
            converged: converged && projections_converged && feasible,
            objective_path,
            row_residuals,
            col_residuals,
        });
    }

    // Reorder by decreasing pseudo-singular value; stable sort keeps the
    // estimation order on ties.
    let mut order: Vec<usize> = (0..cfg.rank).collect();
    order.sort_by(|&a, &b| delta_hat[b].partial_cmp(&delta_hat[a]).unwrap());

    let u_cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&l| cfg.row_metric.inv_sqrt_apply(&p_cols[l]))
        .collect();
    let v_cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&l| cfg.col_metric.inv_sqrt_apply(&q_cols[l]))
        .collect();
    let p_sorted: Vec<Vec<f64>> = order.iter().map(|&l| p_cols[l].clone()).collect();
    let q_sorted: Vec<Vec<f64>> = order.iter().map(|&l| q_cols[l].clone()).collect();
    let delta_sorted: Vec<f64> = order.iter().map(|&l| delta_hat[l]).collect();
    let diag_sorted: Vec<DimensionDiagnostics> =
        order.iter().map(|&l| diagnostics[l].clone()).collect();

    Ok(SparseGsvdResult {
        p: Matrix::from_columns(&p_sorted)?,
        q: Matrix::from_columns(&q_sorted)?,
        u: Matrix::from_columns(&u_cols)?,
        v: Matrix::from_columns(&v_cols)?,
        delta_hat: delta_sorted,
        estimation_order: order,
        dimensions: diag_sorted,
        row_metric: cfg.row_metric.clone(),
        col_metric: cfg.col_metric.clone(),
        row_constraints: cfg.row_constraints.clone(),
        col_constraints: cfg.col_constraints.clone(),
        priority: cfg.priority,
    })
}

/// Constrained SVD: the group-sparse decomposition with identity metrics and
/// singleton groups (plain L1 sparsity on both sides).
pub fn csvd(
    x: &Matrix,
    rank: usize,
    row_radii: &[f64],
    col_radii: &[f64],
    epsilon: f64,
    max_iter: usize,
) -> Result<SparseGsvdResult> {
    let cfg = radii_config(
        rank,
        row_radii,
        col_radii,
        DiagonalMetric::identity(x.rows()),
        DiagonalMetric::identity(x.cols()),
        epsilon,
        max_iter,
    )?;
    gsgsvd(x, &cfg)
}

/// Sparse GSVD: singleton groups with caller-provided metrics.
#[allow(clippy::too_many_arguments)]
pub fn sgsvd(
    x: &Matrix,
    row_metric: &DiagonalMetric,
    col_metric: &DiagonalMetric,
    rank: usize,
    row_radii: &[f64],
    col_radii: &[f64],
    epsilon: f64,
    max_iter: usize,
) -> Result<SparseGsvdResult> {
    let cfg = radii_config(
        rank,
        row_radii,
        col_radii,
        row_metric.clone(),
        col_metric.clone(),
        epsilon,
        max_iter,
    )?;
    gsgsvd(x, &cfg)
}

#[allow(clippy::too_many_arguments)]
fn radii_config(
    rank: usize,
    row_radii: &[f64],
    col_radii: &[f64],
    row_metric: DiagonalMetric,
    col_metric: DiagonalMetric,
    epsilon: f64,
    max_iter: usize,
) -> Result<SparseGsvdConfig> {
    if row_radii.len() != rank || col_radii.len() != rank {
        return Err(Error::InvalidConfig(format!(
            "need one radius per dimension: expected {rank}, got {} rows / {} cols",
            row_radii.len(),
            col_radii.len()
        )));
    }
    Ok(SparseGsvdConfig {
        rank,
        row_constraints: row_radii.iter().map(|&r| SparsityConstraint::l1(r)).collect(),
        col_constraints: col_radii.iter().map(|&r| SparsityConstraint::l1(r)).collect(),
        row_metric,
        col_metric,
        epsilon,
        max_iter,
        priority: PocsPriority::SparsityLast,
    })
}

/// Fit ratio: the sum of the first `l` squared pseudo-singular values over
/// the sum of the first `l` squared singular values of the plain reference.
pub fn fit_ratio(result: &SparseGsvdResult, reference: &GsvdResult, l: usize) -> Result<f64> {
    if l == 0 || l > result.rank() || l > reference.rank() {
        return Err(Error::DimensionMismatch(format!(
            "fit ratio over {l} dimensions needs both decompositions to have at least {l}"
        )));
    }
    let num: f64 = result.delta_hat.iter().take(l).map(|d| d * d).sum();
    let den: f64 = reference.delta.iter().take(l).map(|d| d * d).sum();
    if den == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(num / den)
}
