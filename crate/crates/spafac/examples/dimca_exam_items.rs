//! Discriminant MCA (DiMCA): binary exam items one-hot coded, observations
//! summed within grade groups, and sparsification selecting the item blocks
//! that separate the groups. Classification accuracy is compared between the
//! plain and the sparse model to show the interpretability/fit trade-off.
//!
//! Run with `cargo run --example dimca_exam_items`.

use spafac::{classify_nearest_group, fit_dimca, ingest_categorical, FitOptions};

fn main() {
    // 60 students, 6 binary items, 3 grade groups. Items 1-3 track the
    // grade strongly, items 4-6 are coin flips.
    let mut csv = String::from("id,grade,i1,i2,i3,i4,i5,i6\n");
    let mut state = 0x9E3779B97F4A7C15_u64;
    let mut rand = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state % 100
    };
    for s in 0..60 {
        let grade = s % 3; // 0 = AB, 1 = C, 2 = DF
        let skill = [92u64, 55, 12][grade];
        let mut row = format!("s{s},{}", ["AB", "C", "DF"][grade]);
        for item in 0..6 {
            let p = if item < 3 { skill } else { 50 };
            row.push_str(if rand() < p { ",correct" } else { ",wrong" });
        }
        csv.push_str(&row);
        csv.push('\n');
    }

    let ingest = ingest_categorical(csv.as_bytes(), Some("grade")).expect("coding");
    let table = ingest.table;
    let groups = ingest.groups.expect("grade column");
    println!(
        "{} students, {} items ({} level columns), groups {:?}",
        table.indicator().rows(),
        table.variable_count(),
        table.indicator().cols(),
        groups.labels()
    );

    let mut plain_options = FitOptions::with_rank(2);
    plain_options.epsilon = 1e-11;
    let plain = fit_dimca(&table, &groups, &plain_options).expect("plain DiMCA");

    let mut sparse_options = FitOptions::sparse(2, 1.0, 0.45);
    sparse_options.epsilon = 1e-10;
    let sparse_model = fit_dimca(&table, &groups, &sparse_options).expect("sparse DiMCA");

    println!("\ngrade-group factor scores (sparse model):");
    for (g, label) in sparse_model.row_labels.iter().enumerate() {
        println!(
            "  {label}: ({:+.4}, {:+.4})",
            sparse_model.f.get(g, 0),
            sparse_model.f.get(g, 1)
        );
    }

    let v = sparse_model.decomposition.v();
    println!("\nitem blocks on dimension 1 (kept or dropped as wholes):");
    for (start, len) in sparse_model.column_blocks.clone().unwrap() {
        let kept = (start..start + len).any(|j| v.get(j, 0) != 0.0);
        let name = sparse_model.col_labels[start].split(':').next().unwrap();
        if kept {
            let levels: Vec<String> = (start..start + len)
                .filter(|&j| v.get(j, 0) != 0.0)
                .map(|j| {
                    format!(
                        "{}={:+.3}",
                        sparse_model.col_labels[j].split(':').nth(1).unwrap(),
                        sparse_model.g.get(j, 0)
                    )
                })
                .collect();
            println!("  {name}: kept ({})", levels.join(", "));
        } else {
            println!("  {name}: dropped");
        }
    }

    let plain_report =
        classify_nearest_group(&plain, table.indicator(), &groups).expect("classification");
    let sparse_report =
        classify_nearest_group(&sparse_model, table.indicator(), &groups).expect("classification");
    println!(
        "\nnearest-centroid accuracy: plain {:.2}, sparse {:.2} (chance {:.2})",
        plain_report.overall_accuracy,
        sparse_report.overall_accuracy,
        sparse_report.chance_level
    );
    println!("sparse confusion (rows = true groups): {:?}", sparse_report.confusion);
}
