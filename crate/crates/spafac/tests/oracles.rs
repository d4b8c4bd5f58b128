//! Oracle-backed checks: the alternating decompositions against a standalone
//! Jacobi SVD, the projections against exact geometric oracles and sampled
//! feasible points, and the sparse supports against exhaustive enumeration.

mod common;

use common::*;
use rand::Rng;
use spafac::projectors::{OrthoBasis, PocsPriority, SparsityConstraint};
use spafac::{
    als_svd, csvd, inertia, pocs_project, proj_group_ball, proj_l1_ball, proj_l2_ball,
    DiagonalMetric, GroupPartition, Matrix,
};

#[test]
fn als_svd_matches_the_jacobi_oracle_on_random_matrices() {
    let mut rng = rng(0xABCD);
    for trial in 0..20 {
        let x = random_matrix(&mut rng, 5, 4, -2.0, 2.0);
        let als = als_svd(&x, 4, 1e-12, 10_000).unwrap();
        let oracle = svd_oracle(&x);
        for l in 0..4 {
            assert!(
                (als.delta[l] - oracle.singular_values[l]).abs() < 1e-8,
                "trial {trial} sigma[{l}]: {} vs {}",
                als.delta[l],
                oracle.singular_values[l]
            );
            // Vectors agree up to sign on simple spectra.
            let q = als.q.column(l);
            let overlap: f64 = q
                .iter()
                .zip(oracle.right_vectors[l].iter())
                .map(|(a, b)| a * b)
                .sum();
            assert!(
                (overlap.abs() - 1.0).abs() < 1e-6,
                "trial {trial} right vector {l} overlap {overlap}"
            );
        }
        // Reconstruction through the oracle's spectrum.
        assert!(x.max_abs_diff(&als.reconstruct()) < 1e-8);
    }
}

#[test]
fn inertia_equals_oracle_spectrum_energy() {
    let mut rng = rng(77);
    for _ in 0..10 {
        let x = random_matrix(&mut rng, 6, 5, -1.5, 1.5);
        let m = DiagonalMetric::new((0..6).map(|_| rng.gen_range(0.3..3.0)).collect()).unwrap();
        let w = DiagonalMetric::new((0..5).map(|_| rng.gen_range(0.3..3.0)).collect()).unwrap();
        let weighted = spafac::weighted_transform(&x, &m, &w).unwrap();
        let oracle = svd_oracle(&weighted);
        let energy: f64 = oracle.singular_values.iter().map(|s| s * s).sum();
        assert!((inertia(&x, &m, &w).unwrap() - energy).abs() < 1e-8);
    }
}

#[test]
fn l1_projection_matches_the_face_enumeration_oracle() {
    let mut rng = rng(11);
    for _ in 0..500 {
        let dim = rng.gen_range(2..=4usize);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let radius = rng.gen_range(1.0..(dim as f64).sqrt());
        let ours = proj_l1_ball(&x, radius);
        let oracle = l1_projection_oracle(&x, radius);
        for (a, b) in ours.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-9, "{ours:?} vs {oracle:?} (r={radius})");
        }
    }
}

#[test]
fn group_projection_matches_the_dual_bisection_oracle() {
    let mut rng = rng(13);
    for _ in 0..500 {
        let dim = rng.gen_range(2..=4usize);
        let assignments: Vec<usize> = {
            // Random contiguous-ized partition.
            let raw: Vec<usize> = (0..dim).map(|_| rng.gen_range(0..dim)).collect();
            let mut ids: Vec<usize> = Vec::new();
            raw.iter()
                .map(|g| match ids.iter().position(|x| x == g) {
                    Some(p) => p,
                    None => {
                        ids.push(*g);
                        ids.len() - 1
                    }
                })
                .collect()
        };
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let radius = rng.gen_range(1.0..(dim as f64).sqrt());
        let constraint = SparsityConstraint::grouped(
            radius,
            GroupPartition::new(assignments.clone()).unwrap(),
        );
        let ours = proj_group_ball(&x, &constraint).unwrap();
        let oracle = group_projection_oracle(&x, &assignments, radius);
        for (a, b) in ours.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-8, "{ours:?} vs {oracle:?} (r={radius})");
        }
    }
}

#[test]
fn projections_beat_every_sampled_feasible_point() {
    // Euclidean optimality: no feasible point is closer to the input than
    // the projection, checked over 10^4 samples per projection kind.
    let mut rng = rng(17);
    let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let r_l1 = 1.3;
    let p_l1 = proj_l1_ball(&x, r_l1);
    let d_l1: f64 = x.iter().zip(&p_l1).map(|(a, b)| (a - b) * (a - b)).sum();
    let partition = GroupPartition::new(vec![0, 0, 1, 1]).unwrap();
    let c_group = SparsityConstraint::grouped(1.2, partition);
    let p_group = proj_group_ball(&x, &c_group).unwrap();
    let d_group: f64 = x.iter().zip(&p_group).map(|(a, b)| (a - b) * (a - b)).sum();
    let p_l2 = proj_l2_ball(&x, 1.0);
    let d_l2: f64 = x.iter().zip(&p_l2).map(|(a, b)| (a - b) * (a - b)).sum();

    let mut tested = 0;
    while tested < 10_000 {
        let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        if l1 <= r_l1 {
            let d: f64 = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d + 1e-12 >= d_l1, "feasible point beats the L1 projection");
        }
        if c_group.group_norm(&z) <= 1.2 {
            let d: f64 = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d + 1e-12 >= d_group, "feasible point beats the group projection");
        }
        if z.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 {
            let d: f64 = x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(d + 1e-12 >= d_l2, "feasible point beats the L2 projection");
        }
        tested += 1;
    }
}

#[test]
fn pocs_limit_agrees_with_a_long_alternating_projection_run() {
    // 4-dim input, one basis vector, singleton radius 1.2: the cyclic result
    // satisfies all three constraints and matches a brute-force alternating
    // projection run to 10^6 cycles.
    let basis = OrthoBasis::from_columns(4, vec![vec![0.5, 0.5, 0.5, 0.5]]).unwrap();
    let constraint = SparsityConstraint::l1(1.2);
    let x = [1.4, -0.3, 0.9, 0.2];
    let result = pocs_project(
        &x,
        &constraint,
        &basis,
        PocsPriority::SparsityLast,
        1e-14,
        10_000,
    )
    .unwrap();
    assert!(result.converged);
    assert!(result.residuals.orthogonality < 1e-10);
    assert!(result.residuals.group_excess < 1e-10);
    assert!(result.residuals.l2_excess < 1e-10);

    // Brute force: same elementary steps, fixed long schedule.
    let mut y = x.to_vec();
    for _ in 0..1_000_000 {
        y = spafac::proj_orthocomplement(&y, &basis);
        y = proj_l2_ball(&y, 1.0);
        y = proj_group_ball(&y, &constraint).unwrap();
    }
    for (a, b) in result.x.iter().zip(y.iter()) {
        assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", result.x, y);
    }
}

#[test]
fn tight_csvd_supports_match_exhaustive_enumeration() {
    // 6x5 matrix with two disjoint blocks of mass; rank 2 with a tight
    // column radius keeps each right vector on one block.
    let mut values = vec![0.05_f64; 30];
    let block_a = [(0usize, 0usize), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)];
    let block_b = [(3usize, 2usize), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3), (5, 4), (4, 4)];
    for &(i, j) in &block_a {
        values[i * 5 + j] = 3.0 + (i + j) as f64 * 0.4;
    }
    for &(i, j) in &block_b {
        values[i * 5 + j] = 2.0 + (i + j) as f64 * 0.3;
    }
    let x = Matrix::new(6, 5, values).unwrap();
    let result = csvd(&x, 2, &[1.4, 1.4], &[1.1, 1.1], 1e-11, 5000).unwrap();
    assert!(result.all_converged());

    let rows_a: Vec<usize> = vec![0, 1, 2];
    let cols_a: Vec<usize> = vec![0, 1];
    let rows_b: Vec<usize> = vec![3, 4, 5];
    let cols_b: Vec<usize> = vec![2, 3, 4];
    // Dimensions conditioned on the earlier ones: the enumeration for
    // dimension l runs on the matrix with the accepted components projected
    // out, matching the orthogonality constraint.
    let mut residual = x.clone();
    for l in 0..2 {
        let row_support: Vec<usize> = (0..6).filter(|&i| result.p.get(i, l) != 0.0).collect();
        let col_support: Vec<usize> = (0..5).filter(|&j| result.q.get(j, l) != 0.0).collect();
        let in_a = row_support.iter().all(|i| rows_a.contains(i))
            && col_support.iter().all(|j| cols_a.contains(j));
        let in_b = row_support.iter().all(|i| rows_b.contains(i))
            && col_support.iter().all(|j| cols_b.contains(j));
        assert!(
            in_a || in_b,
            "dimension {l} mixes blocks: rows {row_support:?}, cols {col_support:?}"
        );

        // Exhaustive oracle: among all supports of the same cardinality, the
        // chosen one maximizes the best rank-one fit of the residual.
        let k_rows = row_support.len();
        let k_cols = col_support.len();
        let observed = top_singular_on_support(&residual, &row_support, &col_support);
        let mut best = f64::MIN;
        let mut best_support = (Vec::new(), Vec::new());
        for rows in subsets(6, k_rows) {
            for cols in subsets(5, k_cols) {
                let sigma = top_singular_on_support(&residual, &rows, &cols);
                if sigma > best {
                    best = sigma;
                    best_support = (rows.clone(), cols.clone());
                }
            }
        }
        assert!(
            observed >= best - 1e-8,
            "dimension {l}: support {row_support:?}/{col_support:?} gives sigma {observed}, \
             enumeration found {best} at {best_support:?}"
        );

        // Project the accepted component out: (I - p p^T) R (I - q q^T).
        let p = result.p.column(l);
        let q = result.q.column(l);
        let rp = residual.tr_matvec(&p); // R^T p
        let rq = residual.matvec(&q); // R q
        let pq: f64 = p
            .iter()
            .zip(residual.matvec(&q).iter())
            .map(|(a, b)| a * b)
            .sum();
        residual.subtract_outer(1.0, &p, &rp);
        residual.subtract_outer(1.0, &rq, &q);
        residual.subtract_outer(-pq, &p, &q);
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, k, current, out);
            current.pop();
        }
    }
    recurse(0, n, k, &mut current, &mut out);
    out
}

/// Largest singular value of the submatrix restricted to the given support,
/// by straightforward power iteration on the small dense block.
fn top_singular_on_support(x: &Matrix, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let mut v = vec![1.0; cols.len()];
    let mut sigma = 0.0;
    for _ in 0..200 {
        let mut u = vec![0.0; rows.len()];
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                u[a] += x.get(i, j) * v[b];
            }
        }
        let un: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if un == 0.0 {
            return 0.0;
        }
        for a in u.iter_mut() {
            *a /= un;
        }
        let mut w = vec![0.0; cols.len()];
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                w[b] += x.get(i, j) * u[a];
            }
        }
        let wn: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        for b in w.iter_mut() {
            *b /= wn;
        }
        v = w;
        sigma = wn;
    }
    sigma
}
