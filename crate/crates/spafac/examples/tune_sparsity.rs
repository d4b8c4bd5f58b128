//! Choosing the sparsity radii and the rank by grid search: every candidate
//! cell is scored with the sparsity index (zero ratio times fit), and the
//! argmax is refit as the reported model.
//!
//! Run with `cargo run --example tune_sparsity`.

use spafac::tuning::{fit_best, grid_search, GridSpec, IndexSelector};
use spafac::{preprocess_ca, ContingencyTable, Matrix};

fn main() {
    // Two planted row/column blocks on top of an independent background, so
    // a genuinely sparse two-dimensional solution exists.
    let (rows, cols) = (8, 6);
    let mut values = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            values[i * cols + j] = 10.0;
        }
    }
    let block_a: [(usize, f64); 4] = [(0, 3.0), (1, 2.0), (2, -2.0), (3, -3.0)];
    let block_b: [(usize, f64); 4] = [(4, 2.5), (5, 1.5), (6, -1.5), (7, -2.5)];
    for (i, a) in block_a {
        for (j, b) in [(0usize, 2.0), (1, -2.0)] {
            values[i * cols + j] += a * b * 0.45;
        }
    }
    for (i, a) in block_b {
        for (j, b) in [(3usize, 1.8), (4, -1.8)] {
            values[i * cols + j] += a * b * 0.45;
        }
    }
    let counts = Matrix::new(rows, cols, values).expect("counts");
    let table = ContingencyTable::new(
        counts,
        (0..rows).map(|i| format!("r{i}")).collect(),
        (0..cols).map(|j| format!("c{j}")).collect(),
    )
    .expect("table");
    let prepared = preprocess_ca(&table).expect("preprocessing");

    let mut spec = GridSpec::new(
        vec![0.4, 0.6, 0.8, 1.0],
        vec![0.4, 0.6, 0.8, 1.0],
        vec![2, 3],
    );
    spec.epsilon = 1e-10;
    let grid = grid_search(&prepared, &spec, IndexSelector::Both).expect("grid search");

    println!("rows fraction | cols fraction | rank | zeros  | fit    | index  | zone");
    for (i, cell) in grid.cells.iter().enumerate() {
        match &cell.indices {
            Some(s) => println!(
                "{:>13.2} | {:>13.2} | {:>4} | {:.4} | {:.4} | {:.4} | {}{}",
                cell.row_fraction,
                cell.col_fraction,
                cell.rank,
                s.zero_ratio,
                s.fit,
                s.index,
                s.zone.number(),
                if grid.best == Some(i) { "  <- best" } else { "" }
            ),
            None => println!(
                "{:>13.2} | {:>13.2} | {:>4} | failed: {}",
                cell.row_fraction,
                cell.col_fraction,
                cell.rank,
                cell.error.as_deref().unwrap_or("?")
            ),
        }
    }

    let best = fit_best(&prepared, &grid, &spec).expect("refit at the argmax");
    let sparse = best.decomposition.sparse().expect("sparse model");
    println!("\nbest model support (column side):");
    for l in 0..best.rank() {
        let support: Vec<&str> = (0..best.x.cols())
            .filter(|&j| sparse.v.get(j, l) != 0.0)
            .map(|j| best.col_labels[j].as_str())
            .collect();
        println!("  dimension {}: {:?}", l + 1, support);
    }
}
