//! Sparse correspondence analysis: the same table as `plain_ca` but with the
//! loadings constrained to an L1 ball, so weak associations are shrunk to
//! exact zeros. Shows the sparsity indices, the constraint residuals, the
//! sparse transition formulas, and the property report.
//!
//! Run with `cargo run --example sparse_ca`.

use spafac::als::als_gsvd;
use spafac::tuning::{sparsity_indices, ZoneThresholds};
use spafac::{
    check_properties, fit_ca, transition_col_from_row, ContingencyTable, DiagonalMetric,
    FitOptions, Matrix,
};

fn main() {
    let counts = Matrix::new(
        4,
        3,
        vec![
            25.0, 4.0, 1.0, //
            9.0, 18.0, 3.0, //
            2.0, 12.0, 16.0, //
            1.0, 3.0, 22.0,
        ],
    )
    .expect("valid counts");
    let table = ContingencyTable::new(
        counts,
        vec!["0-19".into(), "20-39".into(), "40-64".into(), "65+".into()],
        vec!["external".into(), "circulatory".into(), "neoplasm".into()],
    )
    .expect("valid table");

    // Radii 0.8 * sqrt(4) on rows, 0.8 * sqrt(3) on columns.
    let mut options = FitOptions::sparse(2, 0.8, 0.8);
    options.epsilon = 1e-11;
    let model = fit_ca(&table, &options).expect("sparse fit");
    let sparse = model.decomposition.sparse().expect("sparse decomposition");

    println!("pseudo-singular values: {:?}", sparse.delta_hat);
    println!("estimation order:       {:?}", sparse.estimation_order);
    println!("\nsparse loadings (column side, exact zeros shown as '.'):");
    for (j, label) in model.col_labels.iter().enumerate() {
        let fmt = |v: f64| {
            if v == 0.0 {
                "      .".to_string()
            } else {
                format!("{v:+.4}")
            }
        };
        println!(
            "  {label:>12}: {} {}",
            fmt(sparse.v.get(j, 0)),
            fmt(sparse.v.get(j, 1))
        );
    }

    for (l, d) in sparse.dimensions.iter().enumerate() {
        println!(
            "dimension {}: {} iterations, converged = {}, worst residuals \
             (orth {:.1e}, group {:.1e})",
            l + 1,
            d.iterations,
            d.converged,
            d.row_residuals.orthogonality.max(d.col_residuals.orthogonality),
            d.row_residuals.group_excess.max(d.col_residuals.group_excess),
        );
    }

    // Indices against the plain reference.
    let reference = als_gsvd(
        &model.x,
        &DiagonalMetric::inverse_of(&model.row_masses).unwrap(),
        &DiagonalMetric::inverse_of(&model.col_masses).unwrap(),
        2,
        1e-11,
        4000,
    )
    .expect("plain reference");
    let s = sparsity_indices(sparse, &reference, 2, &ZoneThresholds::default()).expect("indices");
    println!(
        "\nzero ratio {:.3}, fit {:.3}, sparsity index {:.3} (zone {})",
        s.zero_ratio,
        s.fit,
        s.index,
        s.zone.number()
    );

    // The nonlinear transition formulas reproduce the stored scores.
    let g0 = transition_col_from_row(&model, 0).expect("transition");
    let worst = g0
        .iter()
        .enumerate()
        .map(|(j, v)| (v - model.g.get(j, 0)).abs())
        .fold(0.0_f64, f64::max)
        .max(
            transition_col_from_row(&model, 1)
                .expect("transition")
                .iter()
                .enumerate()
                .map(|(j, v)| (v - model.g.get(j, 1)).abs())
                .fold(0.0_f64, f64::max),
        );
    println!("sparse transition formulas reproduce G within {worst:.2e}");

    let report = check_properties(&model).expect("properties");
    println!(
        "\nglobal column barycenter residual: {:.2e} (lost under L1 sparsity: {})",
        report.col_barycenter_residual,
        !report.barycenters_pass
    );
    println!(
        "embedded first pseudo-singular value: {:.6} (at most 1)",
        report.embedded_first_delta
    );
}
