//! Plain correspondence analysis of a small contingency table: eigenvalues,
//! factor scores, contributions, transition formulas, and a supplementary
//! row projection.
//!
//! Run with `cargo run --example plain_ca`.

use spafac::{
    fit_ca, supplementary_row, transition_row_from_col, ContingencyTable, FitOptions, Matrix,
};

fn main() {
    // Deaths by age band and cause, invented numbers with a clear diagonal
    // association.
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

    let model = fit_ca(&table, &FitOptions::with_rank(2)).expect("fit");

    println!("total inertia (chi^2 / N): {:.6}", model.total_inertia());
    for (l, (eig, pct)) in model
        .eigenvalues()
        .iter()
        .zip(model.percent_inertia().iter())
        .enumerate()
    {
        println!("dimension {}: eigenvalue {:.6} ({:.1}% of inertia)", l + 1, eig, pct);
    }

    println!("\nrow factor scores:");
    for (i, label) in model.row_labels.iter().enumerate() {
        println!(
            "  {label:>6}: {:+.4} {:+.4}  (ctr {:.3}, {:.3})",
            model.f.get(i, 0),
            model.f.get(i, 1),
            model.row_contributions.get(i, 0),
            model.row_contributions.get(i, 1),
        );
    }
    println!("column factor scores:");
    for (j, label) in model.col_labels.iter().enumerate() {
        println!(
            "  {label:>12}: {:+.4} {:+.4}",
            model.g.get(j, 0),
            model.g.get(j, 1)
        );
    }

    // Transition formula: rows from columns.
    let recovered = transition_row_from_col(&model, 0).expect("transition");
    let worst = recovered
        .iter()
        .enumerate()
        .map(|(i, v)| (v - model.f.get(i, 0)).abs())
        .fold(0.0_f64, f64::max);
    println!("\ntransition formula reproduces F within {worst:.2e}");

    // A supplementary age band, and proof that profiles (not totals) matter.
    let new_band = vec![5.0, 9.0, 8.0];
    let projected = supplementary_row(&model, &new_band).expect("projection");
    println!("supplementary row projects to ({:+.4}, {:+.4})", projected[0], projected[1]);
    let scaled: Vec<f64> = new_band.iter().map(|v| 3.0 * v).collect();
    let projected_scaled = supplementary_row(&model, &scaled).expect("projection");
    assert!((projected[0] - projected_scaled[0]).abs() < 1e-12);
    println!("tripling the counts gives the same projection (distributional equivalence)");
}
