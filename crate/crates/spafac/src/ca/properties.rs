//! Diagnostic report over the structural properties of a fitted model:
//! barycenters, distributional equivalence, and the embedded solution of the
//! uncentered probability matrix. The report states residuals and pass flags;
//! sparse models are expected to lose some of these (notably the global
//! barycenter under plain L1 sparsity) and the point is to measure, not mask.

use crate::als::als_gsvd;
use crate::ca::{fit_prepared, CaMethod, CaModel, Decomposition, FitOptions, Prepared};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::sparse::{gsgsvd, SparseGsvdConfig};

/// Residual tolerance below which a property counts as holding.
pub const PROPERTY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PropertyReport {
    pub method: CaMethod,
    pub sparse: bool,
    /// `max_l |r^T f_l|`.
    pub row_barycenter_residual: f64,
    /// `max_l |c^T g_l|`.
    pub col_barycenter_residual: f64,
    pub barycenters_pass: bool,
    /// MCA/DiMCA only: `max_{k,l} |sum_{j in block k} c_j g_jl|`.
    pub per_variable_barycenter_residual: Option<f64>,
    pub per_variable_barycenter_pass: Option<bool>,
    /// Worst factor-score change when one row is split into two proportional
    /// halves and the table is reanalyzed (the merge direction of
    /// distributional equivalence, run on the plain decomposition).
    pub distributional_residual: f64,
    pub distributional_pass: bool,
    /// First (pseudo-)singular value of the uncentered probability matrix.
    pub embedded_first_delta: f64,
    /// `|delta_1 - 1|`; zero for plain models.
    pub embedded_delta_residual: f64,
    /// `max_i |u_1[i] - r_i|` against the row masses (plain expectation).
    pub embedded_u_residual: f64,
    /// `max_j |v_1[j] - c_j|` against the column masses (plain expectation).
    pub embedded_v_residual: f64,
    /// Plain: all three embedded residuals within tolerance. Sparse: the
    /// first pseudo-singular value does not exceed 1.
    pub embedded_pass: bool,
}

/// Measures the barycentric, distributional-equivalence, and
/// embedded-solution properties of a fitted model.
pub fn check_properties(model: &CaModel) -> Result<PropertyReport> {
    let rank = model.rank();
    let sparse = model.is_sparse();

    let mut row_bary = 0.0_f64;
    let mut col_bary = 0.0_f64;
    for l in 0..rank {
        let rf: f64 = (0..model.x.rows())
            .map(|i| model.row_masses[i] * model.f.get(i, l))
            .sum();
        let cg: f64 = (0..model.x.cols())
            .map(|j| model.col_masses[j] * model.g.get(j, l))
            .sum();
        row_bary = row_bary.max(rf.abs());
        col_bary = col_bary.max(cg.abs());
    }

    let per_variable = model.column_blocks.as_ref().map(|blocks| {
        let mut worst = 0.0_f64;
        for l in 0..rank {
            for &(start, len) in blocks {
                let s: f64 = (start..start + len)
                    .map(|j| model.col_masses[j] * model.g.get(j, l))
                    .sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    });

    let distributional_residual = split_row_residual(model)?;
    let embedded = embedded_solution(model)?;

    Ok(PropertyReport {
        method: model.method,
        sparse,
        row_barycenter_residual: row_bary,
        col_barycenter_residual: col_bary,
        barycenters_pass: row_bary < PROPERTY_TOL && col_bary < PROPERTY_TOL,
        per_variable_barycenter_residual: per_variable,
        per_variable_barycenter_pass: per_variable.map(|r| r < PROPERTY_TOL),
        distributional_residual,
        distributional_pass: distributional_residual < PROPERTY_TOL,
        embedded_first_delta: embedded.delta1,
        embedded_delta_residual: (embedded.delta1 - 1.0).abs(),
        embedded_u_residual: embedded.u_residual,
        embedded_v_residual: embedded.v_residual,
        embedded_pass: if sparse {
            embedded.delta1 <= 1.0 + PROPERTY_TOL
        } else {
            (embedded.delta1 - 1.0).abs() < PROPERTY_TOL
                && embedded.u_residual < PROPERTY_TOL
                && embedded.v_residual < PROPERTY_TOL
        },
    })
}

/// Splits the heaviest row of `Z = X + r c^T` into two proportional halves,
/// reanalyzes, and returns the worst change in column factor scores plus the
/// disagreement between the two half-rows' scores and the original row's.
fn split_row_residual(model: &CaModel) -> Result<f64> {
    let (nrows, ncols) = model.x.shape();
    let rank = model.rank().min((nrows).min(ncols).saturating_sub(1)).max(1);
    let z = {
        let mut z = model.x.clone();
        z.subtract_outer(-1.0, &model.row_masses, &model.col_masses);
        z
    };
    let split = model
        .row_masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut values = Vec::with_capacity((nrows + 1) * ncols);
    for i in 0..nrows {
        if i == split {
            for j in 0..ncols {
                values.push(0.35 * z.get(i, j));
            }
            for j in 0..ncols {
                values.push(0.65 * z.get(i, j));
            }
        } else {
            for j in 0..ncols {
                values.push(z.get(i, j));
            }
        }
    }
    let expanded = Matrix::new(nrows + 1, ncols, values)?;
    let (x2, r2, c2) = {
        let total = expanded.total();
        let z2 = expanded.scaled(1.0 / total);
        let r2 = z2.row_sums();
        let c2 = z2.col_sums();
        let mut x2 = z2;
        x2.subtract_outer(1.0, &r2, &c2);
        (x2, r2, c2)
    };
    let prep2 = Prepared {
        method: model.method,
        x: x2,
        row_masses: r2,
        col_masses: c2,
        row_labels: (0..nrows + 1).map(|i| format!("r{i}")).collect(),
        col_labels: model.col_labels.clone(),
        column_blocks: model.column_blocks.clone(),
    };
    // The comparison runs on plain decompositions: distributional
    // equivalence is a property of the preprocessing geometry.
    let opts = FitOptions {
        rank: Some(rank),
        epsilon: model.options.epsilon.min(1e-11),
        max_iter: model.options.max_iter.max(4000),
        priority: model.options.priority,
        sparsity: None,
    };
    let refit = fit_prepared(&prep2, &opts)?;
    let baseline = if model.is_sparse() {
        let prep1 = Prepared {
            method: model.method,
            x: model.x.clone(),
            row_masses: model.row_masses.clone(),
            col_masses: model.col_masses.clone(),
            row_labels: model.row_labels.clone(),
            col_labels: model.col_labels.clone(),
            column_blocks: model.column_blocks.clone(),
        };
        fit_prepared(&prep1, &opts)?
    } else {
        model.clone()
    };

    let mut worst = 0.0_f64;
    for l in 0..rank {
        let g_ref = baseline.g.column(l);
        let g_new = refit.g.column(l);
        let sign = if crate::als::dot(&g_ref, &g_new) < 0.0 {
            -1.0
        } else {
            1.0
        };
        for j in 0..ncols {
            worst = worst.max((g_ref[j] - sign * g_new[j]).abs());
        }
        // The two half-rows land on the original row's coordinates.
        let f_orig = baseline.f.get(split, l);
        let f_a = sign * refit.f.get(split, l);
        let f_b = sign * refit.f.get(split + 1, l);
        worst = worst.max((f_a - f_orig).abs());
        worst = worst.max((f_b - f_orig).abs());
    }
    Ok(worst)
}

struct Embedded {
    delta1: f64,
    u_residual: f64,
    v_residual: f64,
}

/// Decomposes the uncentered probability matrix with the model's own method.
/// Plainly this has first triplet `(1, r, c)`; under sparsity the first
/// pseudo-singular value is close to but below 1.
fn embedded_solution(model: &CaModel) -> Result<Embedded> {
    let z = {
        let mut z = model.x.clone();
        z.subtract_outer(-1.0, &model.row_masses, &model.col_masses);
        z
    };
    let row_metric = model.row_metric();
    let col_metric = model.col_metric();
    let epsilon = model.options.epsilon.min(1e-12);
    let max_iter = model.options.max_iter.max(5000);
    let (delta1, mut u1, mut v1) = match &model.decomposition {
        Decomposition::Plain(_) => {
            let r = als_gsvd(&z, &row_metric, &col_metric, 1, epsilon, max_iter)?;
            (r.delta[0], r.u.column(0), r.v.column(0))
        }
        Decomposition::Sparse(sparse) => {
            let mut cfg = SparseGsvdConfig::uniform(
                1,
                sparse.row_constraints[0].clone(),
                sparse.col_constraints[0].clone(),
                row_metric,
                col_metric,
            );
            cfg.epsilon = epsilon;
            cfg.max_iter = max_iter;
            cfg.priority = sparse.priority;
            let r = gsgsvd(&z, &cfg)?;
            (r.delta_hat[0], r.u.column(0), r.v.column(0))
        }
    };
    // Sign-align the pair against the masses before comparing.
    if crate::als::dot(&v1, &model.col_masses) < 0.0 {
        for x in u1.iter_mut() {
            *x = -*x;
        }
        for x in v1.iter_mut() {
            *x = -*x;
        }
    }
    let u_residual = u1
        .iter()
        .zip(model.row_masses.iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let v_residual = v1
        .iter()
        .zip(model.col_masses.iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Embedded {
        delta1,
        u_residual,
        v_residual,
    })
}
