//! Correspondence analysis, multiple correspondence analysis, and their
//! discriminant variants, in plain and sparse form.
//!
//! All four methods share the same skeleton: preprocess counts into a
//! double-centered probability matrix with inverse-mass metrics, decompose it
//! (plainly or under group-sparse constraints), and scale the singular
//! vectors into factor scores and contributions.

mod preprocess;
mod properties;
mod transition;

pub use preprocess::{
    preprocess_ca, preprocess_dimca, preprocess_disca, preprocess_mca, ContingencyTable,
    DisjunctiveTable, GroupDesign, Prepared, VariableSpan,
};
pub use properties::{check_properties, PropertyReport, PROPERTY_TOL};
pub use transition::{
    asymmetric_scores, supplementary_col, supplementary_row, transition_col_from_row,
    transition_row_from_col, SupplementaryProjectors,
};

use crate::als::{als_gsvd, inertia, GsvdResult};
use crate::error::{Error, Result};
use crate::matrix::{DiagonalMetric, Matrix};
use crate::projectors::{GroupPartition, PocsPriority, SparsityConstraint};
use crate::sparse::{gsgsvd, SparseGsvdConfig, SparseGsvdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaMethod {
    Ca,
    Mca,
    Disca,
    Dimca,
}

impl CaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CaMethod::Ca => "ca",
            CaMethod::Mca => "mca",
            CaMethod::Disca => "disca",
            CaMethod::Dimca => "dimca",
        }
    }

    pub fn is_discriminant(&self) -> bool {
        matches!(self, CaMethod::Disca | CaMethod::Dimca)
    }

    pub fn uses_disjunctive_input(&self) -> bool {
        matches!(self, CaMethod::Mca | CaMethod::Dimca)
    }
}

impl std::str::FromStr for CaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ca" => Ok(CaMethod::Ca),
            "mca" => Ok(CaMethod::Mca),
            "disca" => Ok(CaMethod::Disca),
            "dimca" => Ok(CaMethod::Dimca),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?}; expected ca, mca, disca, or dimca"
            ))),
        }
    }
}

/// Plain or sparse decomposition living inside a fitted model.
#[derive(Debug, Clone)]
pub enum Decomposition {
    Plain(GsvdResult),
    Sparse(SparseGsvdResult),
}

impl Decomposition {
    pub fn rank(&self) -> usize {
        match self {
            Decomposition::Plain(r) => r.rank(),
            Decomposition::Sparse(r) => r.rank(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Decomposition::Sparse(_))
    }

    pub fn all_converged(&self) -> bool {
        match self {
            Decomposition::Plain(r) => r.all_converged(),
            Decomposition::Sparse(r) => r.all_converged(),
        }
    }

    /// Singular values (pseudo-singular under sparsity), largest first.
    pub fn delta(&self) -> &[f64] {
        match self {
            Decomposition::Plain(r) => &r.delta,
            Decomposition::Sparse(r) => &r.delta_hat,
        }
    }

    pub fn p(&self) -> &Matrix {
        match self {
            Decomposition::Plain(r) => &r.p,
            Decomposition::Sparse(r) => &r.p,
        }
    }

    pub fn q(&self) -> &Matrix {
        match self {
            Decomposition::Plain(r) => &r.q,
            Decomposition::Sparse(r) => &r.q,
        }
    }

    pub fn u(&self) -> &Matrix {
        match self {
            Decomposition::Plain(r) => &r.u,
            Decomposition::Sparse(r) => &r.u,
        }
    }

    pub fn v(&self) -> &Matrix {
        match self {
            Decomposition::Plain(r) => &r.v,
            Decomposition::Sparse(r) => &r.v,
        }
    }

    pub fn sparse(&self) -> Option<&SparseGsvdResult> {
        match self {
            Decomposition::Sparse(r) => Some(r),
            Decomposition::Plain(_) => None,
        }
    }
}

/// Sparsity request for a fit: radii as fractions of `sqrt(dim)` applied to
/// every dimension, plus optional group structures. Column groups are derived
/// from the variable blocks for MCA/DiMCA and may not be overridden there.
#[derive(Debug, Clone)]
pub struct SparsitySpec {
    pub row_fraction: f64,
    pub col_fraction: f64,
    pub row_groups: Option<GroupPartition>,
    pub col_groups: Option<GroupPartition>,
}

impl SparsitySpec {
    pub fn fractions(row_fraction: f64, col_fraction: f64) -> Self {
        SparsitySpec {
            row_fraction,
            col_fraction,
            row_groups: None,
            col_groups: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of dimensions; `None` keeps `min(I, J) - 1`, the nontrivial
    /// rank bound of a double-centered table.
    pub rank: Option<usize>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub priority: PocsPriority,
    pub sparsity: Option<SparsitySpec>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rank: None,
            epsilon: crate::als::DEFAULT_EPSILON,
            max_iter: crate::als::DEFAULT_MAX_ITER,
            priority: PocsPriority::SparsityLast,
            sparsity: None,
        }
    }
}

impl FitOptions {
    pub fn with_rank(rank: usize) -> Self {
        FitOptions {
            rank: Some(rank),
            ..Default::default()
        }
    }

    pub fn sparse(rank: usize, row_fraction: f64, col_fraction: f64) -> Self {
        FitOptions {
            rank: Some(rank),
            sparsity: Some(SparsitySpec::fractions(row_fraction, col_fraction)),
            ..Default::default()
        }
    }
}

/// A fitted model: the preprocessed matrix, its masses and metrics, the
/// decomposition, and the derived factor scores and contributions.
#[derive(Debug, Clone)]
pub struct CaModel {
    pub method: CaMethod,
    pub x: Matrix,
    pub row_masses: Vec<f64>,
    pub col_masses: Vec<f64>,
    pub decomposition: Decomposition,
    /// Row factor scores `F = D_r^-1 U diag(delta)`.
    pub f: Matrix,
    /// Column factor scores `G = D_c^-1 V diag(delta)`.
    pub g: Matrix,
    /// Squared weighted loadings; per dimension these sum to 1 for plain
    /// models and to at most 1 under sparsity.
    pub row_contributions: Matrix,
    pub col_contributions: Matrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub column_blocks: Option<Vec<(usize, usize)>>,
    pub options: FitOptions,
    /// Pseudo-inverse projectors for supplementary elements; sparse models
    /// only (plain models project linearly and exactly).
    pub supplementary_projectors: Option<SupplementaryProjectors>,
}

impl CaModel {
    pub fn rank(&self) -> usize {
        self.decomposition.rank()
    }

    pub fn is_sparse(&self) -> bool {
        self.decomposition.is_sparse()
    }

    pub fn row_metric(&self) -> DiagonalMetric {
        DiagonalMetric::inverse_of(&self.row_masses).expect("masses positive by construction")
    }

    pub fn col_metric(&self) -> DiagonalMetric {
        DiagonalMetric::inverse_of(&self.col_masses).expect("masses positive by construction")
    }

    /// Eigenvalues `delta^2`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.decomposition.delta().iter().map(|d| d * d).collect()
    }

    /// Total inertia of the preprocessed matrix (chi-squared over N).
    pub fn total_inertia(&self) -> f64 {
        inertia(&self.x, &self.row_metric(), &self.col_metric())
            .expect("metrics conform by construction")
    }

    /// Uncorrected percentages of inertia per retained dimension.
    pub fn percent_inertia(&self) -> Vec<f64> {
        let total = self.total_inertia();
        if total == 0.0 {
            return vec![0.0; self.rank()];
        }
        self.eigenvalues()
            .iter()
            .map(|e| 100.0 * e / total)
            .collect()
    }
}

/// Decomposes a preprocessed input and derives factor scores and
/// contributions. The sparse path translates the radius fractions into
/// absolute radii, wires the variable-block column groups for MCA/DiMCA, and
/// runs the group-sparse decomposition; the plain path runs the metric GSVD.
pub fn fit_prepared(prep: &Prepared, options: &FitOptions) -> Result<CaModel> {
    let (nrows, ncols) = prep.x.shape();
    let max_rank = nrows.min(ncols);
    let rank = options.rank.unwrap_or_else(|| max_rank.saturating_sub(1).max(1));
    if rank == 0 || rank > max_rank {
        return Err(Error::InvalidConfig(format!(
            "rank {rank} is outside 1..={max_rank} for a {nrows}x{ncols} table"
        )));
    }
    let row_metric = DiagonalMetric::inverse_of(&prep.row_masses)?;
    let col_metric = DiagonalMetric::inverse_of(&prep.col_masses)?;

    let decomposition = match &options.sparsity {
        None => Decomposition::Plain(als_gsvd(
            &prep.x,
            &row_metric,
            &col_metric,
            rank,
            options.epsilon,
            options.max_iter,
        )?),
        Some(spec) => {
            let row_constraint = side_constraint(
                spec.row_fraction,
                nrows,
                spec.row_groups.clone(),
                "row",
            )?;
            let col_groups = match prep.method {
                CaMethod::Mca | CaMethod::Dimca => {
                    if spec.col_groups.is_some() {
                        return Err(Error::InvalidConfig(
                            "column groups are derived from the variable blocks for MCA/DiMCA \
                             and cannot be overridden"
                                .into(),
                        ));
                    }
                    let blocks = prep.column_blocks.as_ref().ok_or_else(|| {
                        Error::InvalidConfig("variable blocks missing for MCA/DiMCA".into())
                    })?;
                    Some(GroupPartition::from_spans(blocks, ncols)?)
                }
                CaMethod::Ca | CaMethod::Disca => spec.col_groups.clone(),
            };
            let col_constraint =
                side_constraint(spec.col_fraction, ncols, col_groups, "column")?;
            let mut cfg = SparseGsvdConfig::uniform(
                rank,
                row_constraint,
                col_constraint,
                row_metric.clone(),
                col_metric.clone(),
            );
            cfg.epsilon = options.epsilon;
            cfg.max_iter = options.max_iter;
            cfg.priority = options.priority;
            Decomposition::Sparse(gsgsvd(&prep.x, &cfg)?)
        }
    };

    let delta = decomposition.delta().to_vec();
    let u = decomposition.u();
    let v = decomposition.v();
    let mut f = Matrix::zeros(nrows, rank);
    for i in 0..nrows {
        for l in 0..rank {
            f.set(i, l, u.get(i, l) / prep.row_masses[i] * delta[l]);
        }
    }
    let mut g = Matrix::zeros(ncols, rank);
    for j in 0..ncols {
        for l in 0..rank {
            g.set(j, l, v.get(j, l) / prep.col_masses[j] * delta[l]);
        }
    }
    // ctr = (D^(-1/2) u) squared elementwise, which is exactly p squared.
    let p = decomposition.p();
    let q = decomposition.q();
    let mut row_ctr = Matrix::zeros(nrows, rank);
    for i in 0..nrows {
        for l in 0..rank {
            let val = p.get(i, l);
            row_ctr.set(i, l, val * val);
        }
    }
    let mut col_ctr = Matrix::zeros(ncols, rank);
    for j in 0..ncols {
        for l in 0..rank {
            let val = q.get(j, l);
            col_ctr.set(j, l, val * val);
        }
    }

    let supplementary_projectors = match &decomposition {
        Decomposition::Sparse(sparse) => Some(transition::sparse_projectors(
            &prep.x,
            &sparse.u,
            &sparse.v,
            &sparse.delta_hat,
        )?),
        Decomposition::Plain(_) => None,
    };

    Ok(CaModel {
        method: prep.method,
        x: prep.x.clone(),
        row_masses: prep.row_masses.clone(),
        col_masses: prep.col_masses.clone(),
        decomposition,
        f,
        g,
        row_contributions: row_ctr,
        col_contributions: col_ctr,
        row_labels: prep.row_labels.clone(),
        col_labels: prep.col_labels.clone(),
        column_blocks: prep.column_blocks.clone(),
        options: options.clone(),
        supplementary_projectors,
    })
}

fn side_constraint(
    fraction: f64,
    dim: usize,
    groups: Option<GroupPartition>,
    side: &str,
) -> Result<SparsityConstraint> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "{side} sparsity fraction {fraction} must lie in (0, 1]"
        )));
    }
    let radius = fraction * (dim as f64).sqrt();
    if radius < 1.0 {
        return Err(Error::InvalidRadius {
            radius,
            max: (dim as f64).sqrt(),
        });
    }
    Ok(match groups {
        Some(partition) => SparsityConstraint::grouped(radius, partition),
        None => SparsityConstraint::l1(radius),
    })
}

pub fn fit_ca(table: &ContingencyTable, options: &FitOptions) -> Result<CaModel> {
    fit_prepared(&preprocess_ca(table)?, options)
}

pub fn fit_mca(table: &DisjunctiveTable, options: &FitOptions) -> Result<CaModel> {
    fit_prepared(&preprocess_mca(table)?, options)
}

pub fn fit_disca(
    table: &ContingencyTable,
    groups: &GroupDesign,
    options: &FitOptions,
) -> Result<CaModel> {
    fit_prepared(&preprocess_disca(table, groups)?, options)
}

pub fn fit_dimca(
    table: &DisjunctiveTable,
    groups: &GroupDesign,
    options: &FitOptions,
) -> Result<CaModel> {
    fit_prepared(&preprocess_dimca(table, groups)?, options)
}
