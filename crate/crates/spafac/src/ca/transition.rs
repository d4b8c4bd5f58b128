//! Transition formulas between row and column factor scores, projections of
//! supplementary (out-of-sample) elements, and the unit-inertia asymmetric
//! scores.
//!
//! Plain models transition linearly. Sparse models need the same nonlinear
//! projector that estimated them, applied in estimation order; supplementary
//! elements additionally go through pseudo-inverse projectors onto the rank-R
//! approximation, which is documented as an approximation.

use crate::als::dot;
use crate::ca::{CaModel, Decomposition};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::projectors::{
    pocs_project_saturated, DEFAULT_POCS_EPSILON, DEFAULT_POCS_MAX_CYCLES,
};
use crate::sparse::SparseGsvdResult;

/// Row factor scores of dimension `l` recomputed from the column side.
/// Plain: `f_l = D_r^-1 X g_l / delta_l`. Sparse: the estimation-order
/// projector applied to `D_r^(-1/2) X D_c^-1 v_l`, scaled by `delta_l`.
pub fn transition_row_from_col(model: &CaModel, l: usize) -> Result<Vec<f64>> {
    check_dimension(model, l)?;
    match &model.decomposition {
        Decomposition::Plain(_) => {
            let delta = model.decomposition.delta()[l];
            if delta == 0.0 {
                return Err(Error::DivisionByZero);
            }
            let g_l = model.g.column(l);
            let y = model.x.matvec(&g_l);
            Ok(y
                .iter()
                .zip(model.row_masses.iter())
                .map(|(v, r)| v / r / delta)
                .collect())
        }
        Decomposition::Sparse(sparse) => {
            let delta = sparse.delta_hat[l];
            let v_l = sparse.v.column(l);
            let scaled: Vec<f64> = v_l
                .iter()
                .zip(model.col_masses.iter())
                .map(|(v, c)| v / c)
                .collect();
            let y = model.x.matvec(&scaled);
            let z: Vec<f64> = y
                .iter()
                .zip(model.row_masses.iter())
                .map(|(v, r)| v / r.sqrt())
                .collect();
            let p_hat = replay_projection(sparse, l, &z, Side::Row)?;
            Ok(p_hat
                .iter()
                .zip(model.row_masses.iter())
                .map(|(p, r)| p / r.sqrt() * delta)
                .collect())
        }
    }
}

/// Column factor scores of dimension `l` recomputed from the row side.
pub fn transition_col_from_row(model: &CaModel, l: usize) -> Result<Vec<f64>> {
    check_dimension(model, l)?;
    match &model.decomposition {
        Decomposition::Plain(_) => {
            let delta = model.decomposition.delta()[l];
            if delta == 0.0 {
                return Err(Error::DivisionByZero);
            }
            let f_l = model.f.column(l);
            let y = model.x.tr_matvec(&f_l);
            Ok(y
                .iter()
                .zip(model.col_masses.iter())
                .map(|(v, c)| v / c / delta)
                .collect())
        }
        Decomposition::Sparse(sparse) => {
            let delta = sparse.delta_hat[l];
            let u_l = sparse.u.column(l);
            let scaled: Vec<f64> = u_l
                .iter()
                .zip(model.row_masses.iter())
                .map(|(u, r)| u / r)
                .collect();
            let y = model.x.tr_matvec(&scaled);
            let z: Vec<f64> = y
                .iter()
                .zip(model.col_masses.iter())
                .map(|(v, c)| v / c.sqrt())
                .collect();
            let q_hat = replay_projection(sparse, l, &z, Side::Col)?;
            Ok(q_hat
                .iter()
                .zip(model.col_masses.iter())
                .map(|(q, c)| q / c.sqrt() * delta)
                .collect())
        }
    }
}

enum Side {
    Row,
    Col,
}

fn replay_projection(
    sparse: &SparseGsvdResult,
    l: usize,
    z: &[f64],
    side: Side,
) -> Result<Vec<f64>> {
    if sparse.estimation_order.len() != sparse.rank() {
        return Err(Error::OrderUnavailable);
    }
    let (p_basis, q_basis) = sparse.bases_before(l)?;
    let original = sparse.estimation_order[l];
    let (constraint, basis) = match side {
        Side::Row => (&sparse.row_constraints[original], p_basis),
        Side::Col => (&sparse.col_constraints[original], q_basis),
    };
    let projected = pocs_project_saturated(
        z,
        constraint,
        &basis,
        sparse.priority,
        DEFAULT_POCS_EPSILON,
        DEFAULT_POCS_MAX_CYCLES,
    )
    .map_err(|e| match e {
        Error::InfeasibleConstraints { .. } => Error::InfeasibleConstraints { dimension: l },
        other => other,
    })?;
    // Match the sign convention applied at estimation time: the replayed
    // vector may come back flipped relative to the stored one.
    let stored = match side {
        Side::Row => sparse.p.column(l),
        Side::Col => sparse.q.column(l),
    };
    let mut x = projected.x;
    if dot(&x, &stored) < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
    Ok(x)
}

fn check_dimension(model: &CaModel, l: usize) -> Result<()> {
    if l >= model.rank() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {l} is outside 0..{}",
            model.rank()
        )));
    }
    Ok(())
}

/// Projects a supplementary row profile (raw nonnegative counts over the
/// model's columns) into the component space.
///
/// Plain models recover member rows exactly; sparse models go through the
/// pseudo-inverse projector onto the rank-R reconstruction and are
/// approximations by construction.
pub fn supplementary_row(model: &CaModel, counts: &[f64]) -> Result<Vec<f64>> {
    let ncols = model.x.cols();
    if counts.len() != ncols {
        return Err(Error::DimensionMismatch(format!(
            "supplementary row has {} entries, expected {ncols}",
            counts.len()
        )));
    }
    if counts.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidConfig(
            "supplementary entries must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroSupplementary);
    }
    let delta = model.decomposition.delta();
    let profile: Vec<f64> = counts.iter().map(|v| v / total).collect();
    match &model.decomposition {
        Decomposition::Plain(_) => (0..model.rank())
            .map(|l| {
                if delta[l] == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(dot(&profile, &model.g.column(l)) / delta[l])
            })
            .collect(),
        Decomposition::Sparse(_) => {
            let projectors = model
                .supplementary_projectors
                .as_ref()
                .ok_or(Error::OrderUnavailable)?;
            // a^T Omega_c, then the plain formula on the mapped profile.
            let mapped = projectors.omega_cols.tr_matvec(&profile);
            (0..model.rank())
                .map(|l| {
                    if delta[l] == 0.0 {
                        return Err(Error::DivisionByZero);
                    }
                    Ok(dot(&mapped, &model.g.column(l)) / delta[l])
                })
                .collect()
        }
    }
}

/// Projects a supplementary column profile (raw nonnegative counts over the
/// model's rows) into the component space; mirror image of
/// [`supplementary_row`].
pub fn supplementary_col(model: &CaModel, counts: &[f64]) -> Result<Vec<f64>> {
    let nrows = model.x.rows();
    if counts.len() != nrows {
        return Err(Error::DimensionMismatch(format!(
            "supplementary column has {} entries, expected {nrows}",
            counts.len()
        )));
    }
    if counts.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidConfig(
            "supplementary entries must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroSupplementary);
    }
    let delta = model.decomposition.delta();
    let profile: Vec<f64> = counts.iter().map(|v| v / total).collect();
    match &model.decomposition {
        Decomposition::Plain(_) => (0..model.rank())
            .map(|l| {
                if delta[l] == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(dot(&profile, &model.f.column(l)) / delta[l])
            })
            .collect(),
        Decomposition::Sparse(_) => {
            let projectors = model
                .supplementary_projectors
                .as_ref()
                .ok_or(Error::OrderUnavailable)?;
            let mapped = projectors.omega_rows.tr_matvec(&profile);
            (0..model.rank())
                .map(|l| {
                    if delta[l] == 0.0 {
                        return Err(Error::DivisionByZero);
                    }
                    Ok(dot(&mapped, &model.f.column(l)) / delta[l])
                })
                .collect()
        }
    }
}

/// Linear projectors approximating the nonlinear sparse transition: `omega_cols`
/// maps column profiles onto the column space of the rank-R reconstruction
/// `U diag(delta) V^T`, `omega_rows` does the same for row profiles.
#[derive(Debug, Clone)]
pub struct SupplementaryProjectors {
    /// `I x I`: `pinv(X^T)^T X_hat^T` acting on supplementary columns.
    pub omega_rows: Matrix,
    /// `J x J`: `pinv(X) X_hat` acting on supplementary rows.
    pub omega_cols: Matrix,
}

/// Builds the pseudo-inverse projectors for a sparse decomposition. The
/// pseudo-inverse goes through the smaller Gram matrix of `X`; it is
/// mandatory because double centering makes `X` rank deficient. Singular
/// values below `max(1e-12, 1e-7) * sigma_max` are dropped: the nominal
/// tolerance is 1e-12, but eigenvalues of a Gram matrix carry noise of order
/// `sqrt(machine epsilon) * sigma_max`, so anything under the 1e-7 floor is
/// indistinguishable from zero on this route.
pub(crate) fn sparse_projectors(
    x: &Matrix,
    u: &Matrix,
    v: &Matrix,
    delta: &[f64],
) -> Result<SupplementaryProjectors> {
    // Rank-R reconstruction, never formed at full precision elsewhere.
    let mut x_hat = Matrix::zeros(x.rows(), x.cols());
    for (l, &d) in delta.iter().enumerate() {
        x_hat.subtract_outer(-d, &u.column(l), &v.column(l));
    }
    let (omega_rows, omega_cols) = if x.cols() <= x.rows() {
        let pinv = pseudo_inverse_gram(&x.transpose().matmul(x)?)?;
        // omega_cols = pinv(X^T X) (X^T X_hat); omega_rows = X pinv X_hat^T.
        let oc = pinv.matmul(&x.transpose().matmul(&x_hat)?)?;
        let or = x.matmul(&pinv)?.matmul(&x_hat.transpose())?;
        (or, oc)
    } else {
        let pinv = pseudo_inverse_gram(&x.matmul(&x.transpose())?)?;
        let oc = x.transpose().matmul(&pinv)?.matmul(&x_hat)?;
        let or = pinv.matmul(&x.matmul(&x_hat.transpose())?)?;
        (or, oc)
    };
    Ok(SupplementaryProjectors {
        omega_rows,
        omega_cols,
    })
}

fn pseudo_inverse_gram(gram: &Matrix) -> Result<Matrix> {
    let n = gram.rows();
    let (eigenvalues, vectors) = gram.symmetric_eigen()?;
    let sigma_max = eigenvalues
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt();
    let cutoff = sigma_max * 1e-7;
    let mut out = Matrix::zeros(n, n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if lambda <= 0.0 || lambda.sqrt() <= cutoff {
            continue;
        }
        let col = vectors.column(k);
        out.subtract_outer(-1.0 / lambda, &col, &col);
    }
    Ok(out)
}

/// Asymmetric factor scores with unit inertia: `F~ = D_r^-1 U`,
/// `G~ = D_c^-1 V`; `F~^T D_r F~ = I` holds for plain and sparse models
/// alike because the (pseudo-)singular vectors stay orthonormal.
pub fn asymmetric_scores(model: &CaModel) -> (Matrix, Matrix) {
    let u = model.decomposition.u();
    let v = model.decomposition.v();
    let rank = model.rank();
    let mut f = Matrix::zeros(u.rows(), rank);
    for i in 0..u.rows() {
        for l in 0..rank {
            f.set(i, l, u.get(i, l) / model.row_masses[i]);
        }
    }
    let mut g = Matrix::zeros(v.rows(), rank);
    for j in 0..v.rows() {
        for l in 0..rank {
            g.set(j, l, v.get(j, l) / model.col_masses[j]);
        }
    }
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{fit_ca, ContingencyTable, FitOptions};

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn toy_model(rank: usize, sparse: Option<(f64, f64)>) -> CaModel {
        let counts = Matrix::new(
            5,
            4,
            vec![
                9.0, 2.0, 1.0, 3.0, 2.0, 8.0, 2.0, 1.0, 1.0, 2.0, 7.0, 2.0, 3.0, 1.0, 2.0, 9.0,
                2.0, 3.0, 4.0, 2.0,
            ],
        )
        .unwrap();
        let t = ContingencyTable::new(counts, labels("r", 5), labels("c", 4)).unwrap();
        let mut opts = match sparse {
            None => FitOptions::with_rank(rank),
            Some((rf, cf)) => FitOptions::sparse(rank, rf, cf),
        };
        opts.epsilon = 1e-11;
        opts.max_iter = 5000;
        fit_ca(&t, &opts).unwrap()
    }

    #[test]
    fn plain_transitions_recover_stored_scores() {
        let model = toy_model(3, None);
        for l in 0..3 {
            let f = transition_row_from_col(&model, l).unwrap();
            let g = transition_col_from_row(&model, l).unwrap();
            for i in 0..5 {
                assert!((f[i] - model.f.get(i, l)).abs() < 1e-10, "f[{i}] dim {l}");
            }
            for j in 0..4 {
                assert!((g[j] - model.g.get(j, l)).abs() < 1e-10, "g[{j}] dim {l}");
            }
        }
    }

    #[test]
    fn sparse_transitions_with_inactive_constraints_reduce_to_plain() {
        let sparse = toy_model(2, Some((1.0, 1.0)));
        for l in 0..2 {
            let f = transition_row_from_col(&sparse, l).unwrap();
            for i in 0..5 {
                assert!((f[i] - sparse.f.get(i, l)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sparse_transitions_reproduce_sparse_scores() {
        let model = toy_model(2, Some((0.8, 0.7)));
        assert!(model.decomposition.all_converged());
        for l in 0..2 {
            let f = transition_row_from_col(&model, l).unwrap();
            let g = transition_col_from_row(&model, l).unwrap();
            for i in 0..5 {
                assert!(
                    (f[i] - model.f.get(i, l)).abs() < 1e-8,
                    "f[{i}] dim {l}: {} vs {}",
                    f[i],
                    model.f.get(i, l)
                );
            }
            for j in 0..4 {
                assert!((g[j] - model.g.get(j, l)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn plain_supplementary_recovers_member_rows() {
        let model = toy_model(3, None);
        // Row 2 of the original counts.
        let row = vec![1.0, 2.0, 7.0, 2.0];
        let f = supplementary_row(&model, &row).unwrap();
        for l in 0..3 {
            assert!(
                (f[l] - model.f.get(2, l)).abs() < 1e-10,
                "dim {l}: {} vs {}",
                f[l],
                model.f.get(2, l)
            );
        }
        // Tripling the counts leaves the profile unchanged.
        let tripled: Vec<f64> = row.iter().map(|v| 3.0 * v).collect();
        let f3 = supplementary_row(&model, &tripled).unwrap();
        for l in 0..3 {
            assert!((f3[l] - f[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn plain_supplementary_col_recovers_member_columns() {
        let model = toy_model(3, None);
        let col = vec![9.0, 2.0, 1.0, 3.0, 2.0];
        let g = supplementary_col(&model, &col).unwrap();
        for l in 0..3 {
            assert!((g[l] - model.g.get(0, l)).abs() < 1e-10);
        }
    }

    #[test]
    fn sparse_supplementary_is_reported_as_residual_not_exact() {
        let model = toy_model(2, Some((0.8, 0.7)));
        let row = vec![1.0, 2.0, 7.0, 2.0];
        let f = supplementary_row(&model, &row).unwrap();
        // Approximation: finite and in the right ballpark, no exactness claim.
        let mut residual = 0.0_f64;
        for l in 0..2 {
            assert!(f[l].is_finite());
            residual = residual.max((f[l] - model.f.get(2, l)).abs());
        }
        assert!(residual < 1.0, "sparse supplementary residual blew up: {residual}");
    }

    #[test]
    fn zero_supplementary_is_rejected() {
        let model = toy_model(2, None);
        assert!(matches!(
            supplementary_row(&model, &[0.0, 0.0, 0.0, 0.0]),
            Err(Error::ZeroSupplementary)
        ));
    }

    #[test]
    fn asymmetric_scores_have_unit_inertia_plain_and_sparse() {
        for model in [toy_model(2, None), toy_model(2, Some((0.8, 0.7)))] {
            let (f_tilde, g_tilde) = asymmetric_scores(&model);
            for a in 0..2 {
                for b in 0..2 {
                    let mut s = 0.0;
                    for i in 0..5 {
                        s += f_tilde.get(i, a) * model.row_masses[i] * f_tilde.get(i, b);
                    }
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (s - expected).abs() < 1e-8,
                        "Ft^T D_r Ft [{a}][{b}] = {s} (sparse: {})",
                        model.is_sparse()
                    );
                    let mut s = 0.0;
                    for j in 0..4 {
                        s += g_tilde.get(j, a) * model.col_masses[j] * g_tilde.get(j, b);
                    }
                    assert!((s - expected).abs() < 1e-8);
                }
            }
            // F~ diag(delta) = F by definition.
            let delta = model.decomposition.delta();
            for i in 0..5 {
                for l in 0..2 {
                    assert!((f_tilde.get(i, l) * delta[l] - model.f.get(i, l)).abs() < 1e-12);
                }
            }
        }
    }
}
