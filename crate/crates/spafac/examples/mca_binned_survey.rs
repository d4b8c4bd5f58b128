//! Sparse multiple correspondence analysis of a Likert-style survey:
//! quantile binning of the numeric answers, disjunctive (one-hot) coding,
//! and the non-optional group constraint that keeps or drops each item's
//! levels together.
//!
//! Run with `cargo run --example mca_binned_survey`.

use spafac::{bin_numeric, check_properties, fit_mca, ingest_categorical, BinSpec, FitOptions};

/// Deterministic 7-point answers for `n` respondents and 4 items; the first
/// two items carry a shared signal, the rest is filler.
fn simulate(n: usize) -> Vec<[f64; 4]> {
    let mut state = 0x2545F4914F6CDD1D_u64;
    let mut rand = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 7) as f64 + 1.0
    };
    (0..n)
        .map(|i| {
            let trait_level = (i % 3) as f64 * 2.0 + 1.0; // 1, 3, 5
            [
                (trait_level + (rand() % 3.0)).min(7.0),
                (trait_level + (rand() % 3.0)).min(7.0),
                rand(),
                rand(),
            ]
        })
        .collect()
}

fn main() {
    let answers = simulate(60);
    // Bin each item into three categories of comparable sizes.
    let mut binned: Vec<Vec<String>> = Vec::new();
    for item in 0..4 {
        let column: Vec<f64> = answers.iter().map(|row| row[item]).collect();
        binned.push(bin_numeric(&column, &BinSpec::Count(3)).expect("binnable"));
    }
    println!("item 1 bins: {:?}", {
        let mut seen: Vec<&String> = Vec::new();
        for b in &binned[0] {
            if !seen.contains(&b) {
                seen.push(b);
            }
        }
        seen
    });

    // Assemble a categorical CSV in memory and one-hot encode it.
    let mut csv = String::from("id,q1,q2,q3,q4\n");
    for i in 0..answers.len() {
        csv.push_str(&format!(
            "s{i},{},{},{},{}\n",
            binned[0][i], binned[1][i], binned[2][i], binned[3][i]
        ));
    }
    let ingest = ingest_categorical(csv.as_bytes(), None).expect("one-hot coding");
    let table = ingest.table;
    println!(
        "{} observations, {} variables, {} level columns",
        table.indicator().rows(),
        table.variable_count(),
        table.indicator().cols()
    );

    // Sparse MCA: no sparsity on respondents, items sparsified as blocks.
    let mut options = FitOptions::sparse(2, 1.0, 0.35);
    options.epsilon = 1e-10;
    let model = fit_mca(&table, &options).expect("sparse MCA");
    let v = model.decomposition.v();

    println!("\nlevel loadings by variable block (zeroed blocks drop out together):");
    for (start, len) in model.column_blocks.clone().unwrap() {
        let block_zero = (start..start + len).all(|j| v.get(j, 0) == 0.0);
        let name = model.col_labels[start].split(':').next().unwrap();
        println!(
            "  {name}: dimension 1 {}",
            if block_zero { "dropped" } else { "kept" }
        );
    }

    let report = check_properties(&model).expect("properties");
    println!(
        "\nper-variable barycenter residual: {:.2e} (kept by the group constraint: {})",
        report.per_variable_barycenter_residual.unwrap(),
        report.per_variable_barycenter_pass.unwrap()
    );
}
