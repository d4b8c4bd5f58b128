//! Discriminant analysis of grouped rows (DiSCA): the analysis runs on the
//! group sums, the individual rows are projected back as supplementary
//! elements, and the separation is evaluated with bootstrap confidence
//! ellipses and nearest-centroid classification.
//!
//! Run with `cargo run --example discriminant_groups`.

use spafac::{
    bootstrap_group_means, classify_nearest_group, fit_disca, supplementary_row, BootstrapSpec,
    ContingencyTable, FitOptions, GroupDesign, Matrix,
};

fn main() {
    // Punctuation-style counts: 12 writers in 3 style groups over 5 marks.
    let patterns = [
        [30.0, 5.0, 8.0, 2.0, 4.0],
        [6.0, 28.0, 4.0, 7.0, 3.0],
        [4.0, 6.0, 9.0, 25.0, 12.0],
    ];
    let mut rows = Vec::new();
    let mut group_labels = Vec::new();
    for (g, base) in patterns.iter().enumerate() {
        for k in 0..4 {
            for (j, b) in base.iter().enumerate() {
                rows.push(b + ((g + j + k) % 3) as f64);
            }
            group_labels.push(format!("style{g}"));
        }
    }
    let observations = Matrix::new(12, 5, rows).expect("counts");
    let table = ContingencyTable::new(
        observations.clone(),
        (0..12).map(|i| format!("writer{i}")).collect(),
        vec!["comma".into(), "period".into(), "colon".into(), "quote".into(), "dash".into()],
    )
    .expect("table");
    let design = GroupDesign::from_labels(&group_labels).expect("design");

    let mut options = FitOptions::with_rank(2);
    options.epsilon = 1e-11;
    let model = fit_disca(&table, &design, &options).expect("DiSCA fit");

    println!("group factor scores (between-group space):");
    for (g, label) in model.row_labels.iter().enumerate() {
        println!("  {label}: ({:+.4}, {:+.4})", model.f.get(g, 0), model.f.get(g, 1));
    }

    println!("\nwriters projected as supplementary rows:");
    for i in [0usize, 5, 9] {
        let score = supplementary_row(&model, observations.row(i)).expect("projection");
        println!("  writer{i} ({}): ({:+.4}, {:+.4})", group_labels[i], score[0], score[1]);
    }

    let report = classify_nearest_group(&model, &observations, &design).expect("classification");
    println!(
        "\nnearest-centroid accuracy: {:.2} (chance level {:.2})",
        report.overall_accuracy, report.chance_level
    );
    for (g, acc) in report.per_group_accuracy.iter().enumerate() {
        println!("  style{g}: {:.2}", acc);
    }

    let ellipses = bootstrap_group_means(
        &model,
        &observations,
        &design,
        &BootstrapSpec {
            replicates: 500,
            confidence: 0.95,
            seed: 7,
        },
        &[(0, 1)],
    )
    .expect("bootstrap");
    println!("\n95% bootstrap ellipses of the group means (dimensions 1 x 2):");
    for group in &ellipses {
        let e = &group.ellipses[0];
        println!(
            "  {}: center ({:+.4}, {:+.4}), half-axes {:.4} / {:.4}{}",
            group.group,
            e.center.0,
            e.center.1,
            e.axis_lengths.0,
            e.axis_lengths.1,
            if group.unreliable { " (tiny group)" } else { "" }
        );
    }
}
