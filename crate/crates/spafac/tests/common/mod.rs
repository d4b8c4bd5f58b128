//! Shared fixtures and independent oracles for the integration tests. The
//! oracles deliberately avoid the library's own algorithmic paths: the SVD
//! oracle is a standalone Jacobi eigensolver on X^T X, the chi-squared oracle
//! sums the textbook cell formula, the L1 projection oracle enumerates the
//! faces of the cross-polytope, and the group-ball oracle bisects the dual
//! multiplier.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spafac::{ContingencyTable, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random dense matrix with entries uniform in `[lo, hi)`.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    let values: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::new(rows, cols, values).expect("random matrix is valid")
}

/// Random positive masses summing to one.
pub fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.8)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random contingency table with strictly positive integer counts.
pub fn random_table(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ContingencyTable {
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| rng.gen_range(1..60) as f64)
        .collect();
    ContingencyTable::new(
        Matrix::new(rows, cols, values).unwrap(),
        labels("r", rows),
        labels("c", cols),
    )
    .expect("positive counts make a valid table")
}

/// Textbook chi-squared over N: sum (observed - expected)^2 / expected / N.
pub fn chi2_over_n(table: &ContingencyTable) -> f64 {
    let a = table.counts();
    let n = table.grand_total();
    let row_sums = a.row_sums();
    let col_sums = a.col_sums();
    let mut chi2 = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let expected = row_sums[i] * col_sums[j] / n;
            let diff = a.get(i, j) - expected;
            chi2 += diff * diff / expected;
        }
    }
    chi2 / n
}

/// Full SVD oracle: Jacobi eigen-decomposition of X^T X implemented from
/// scratch on plain nested vectors, independent of the library's types and
/// of its alternating iteration.
pub struct SvdOracle {
    pub singular_values: Vec<f64>,
    /// Right singular vectors as rows of this list (one per value).
    pub right_vectors: Vec<Vec<f64>>,
    /// Left singular vectors, zero-filled for null directions.
    pub left_vectors: Vec<Vec<f64>>,
}

pub fn svd_oracle(x: &Matrix) -> SvdOracle {
    let (rows, cols) = x.shape();
    // Form X^T X.
    let mut gram = vec![vec![0.0_f64; cols]; cols];
    for i in 0..rows {
        for a in 0..cols {
            for b in 0..cols {
                gram[a][b] += x.get(i, a) * x.get(i, b);
            }
        }
    }
    let (eigenvalues, vectors) = jacobi_eigen(&mut gram);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    let mut singular_values = Vec::new();
    let mut right_vectors = Vec::new();
    let mut left_vectors = Vec::new();
    for &k in &order {
        let sigma = eigenvalues[k].max(0.0).sqrt();
        let v: Vec<f64> = (0..cols).map(|j| vectors[j][k]).collect();
        let mut u = vec![0.0; rows];
        if sigma > 1e-12 {
            for (i, ui) in u.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..cols {
                    s += x.get(i, j) * v[j];
                }
                *ui = s / sigma;
            }
        }
        singular_values.push(sigma);
        right_vectors.push(v);
        left_vectors.push(u);
    }
    SvdOracle {
        singular_values,
        right_vectors,
        left_vectors,
    }
}

/// Cyclic Jacobi on a symmetric matrix stored as nested vectors. Returns
/// `(eigenvalues, eigenvectors-as-columns)`.
fn jacobi_eigen(a: &mut Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1e-300);
    for _sweep in 0..120 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p][q].abs());
            }
        }
        if off <= scale * 1e-15 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= scale * 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Exact Euclidean projection onto the L1 ball by enumerating the faces of
/// the cross-polytope: every face is the convex hull of vertices `r*s_i*e_i`
/// over a support with fixed signs; project onto each face's affine hull,
/// keep feasible candidates, return the nearest. Exact for any dimension,
/// affordable for the small dimensions it is used at.
pub fn l1_projection_oracle(x: &[f64], radius: f64) -> Vec<f64> {
    let n = x.len();
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return x.to_vec();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    // Supports as bitmasks, signs as sub-masks over the support.
    for support in 1_u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| support & (1 << i) != 0).collect();
        let k = members.len();
        for sign_bits in 0..(1_u32 << k) {
            let signs: Vec<f64> = (0..k)
                .map(|t| if sign_bits & (1 << t) != 0 { -1.0 } else { 1.0 })
                .collect();
            // Affine hull: y_i = 0 off support, sum_i sigma_i y_i = r.
            // Projection: y = x_T - ((sigma^T x_T - r)/k) * sigma.
            let sx: f64 = members
                .iter()
                .zip(signs.iter())
                .map(|(&i, s)| s * x[i])
                .sum();
            let shift = (sx - radius) / k as f64;
            let mut y = vec![0.0; n];
            let mut feasible = true;
            for (t, &i) in members.iter().enumerate() {
                y[i] = x[i] - shift * signs[t];
                if signs[t] * y[i] < -1e-12 {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            let dist: f64 = x
                .iter()
                .zip(y.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.as_ref().map_or(true, |(d, _)| dist < *d) {
                best = Some((dist, y));
            }
        }
    }
    best.expect("some face is feasible").1
}

/// Euclidean projection onto the [1,2]-group-norm ball by bisecting the dual
/// multiplier of the KKT system `y_g = x_g * (1 - lambda/||x_g||)_+`,
/// independent of the sort-based route used in the library.
pub fn group_projection_oracle(x: &[f64], assignments: &[usize], radius: f64) -> Vec<f64> {
    let groups = assignments.iter().max().map_or(0, |m| m + 1);
    let mut norms = vec![0.0_f64; groups];
    for (v, &g) in x.iter().zip(assignments.iter()) {
        norms[g] += v * v;
    }
    for n in norms.iter_mut() {
        *n = n.sqrt();
    }
    if norms.iter().sum::<f64>() <= radius {
        return x.to_vec();
    }
    let total = |lambda: f64| -> f64 {
        norms.iter().map(|n| (n - lambda).max(0.0)).sum::<f64>()
    };
    let mut lo = 0.0_f64;
    let mut hi = norms.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let factors: Vec<f64> = norms
        .iter()
        .map(|n| if *n > lambda { (n - lambda) / n } else { 0.0 })
        .collect();
    x.iter()
        .zip(assignments.iter())
        .map(|(v, &g)| v * factors[g])
        .collect()
}

/// Planted two-block table: independence plus two rank-one deviations with
/// disjoint supports, so the exact decomposition is sparse by construction.
pub struct PlantedBlocks {
    pub table: ContingencyTable,
    pub row_supports: [Vec<usize>; 2],
    pub col_supports: [Vec<usize>; 2],
}

/// Builds an `n_rows x n_cols` table (12x10 in the acceptance suite) whose
/// deviation from independence is `g1 * a1 b1^T + g2 * a2 b2^T` with
/// disjoint, zero-sum, graded supports on rows `0..6`/cols `0..5` and rows
/// `6..12`/cols `5..10`.
pub fn planted_two_block_table(n_rows: usize, n_cols: usize, scale: f64) -> PlantedBlocks {
    assert!(n_rows % 2 == 0 && n_cols % 2 == 0);
    let half_r = n_rows / 2;
    let half_c = n_cols / 2;
    let graded = |len: usize| -> Vec<f64> {
        // Zero-sum graded pattern with no zero entries (squared ramp minus
        // its mean), scaled to unit norm, so the support is the whole block.
        let raw: Vec<f64> = (0..len).map(|i| ((len - i) * (len - i)) as f64).collect();
        let mean: f64 = raw.iter().sum::<f64>() / len as f64;
        let v: Vec<f64> = raw.iter().map(|a| a - mean).collect();
        assert!(v.iter().all(|a| a.abs() > 1e-9));
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter().map(|a| a / norm).collect()
    };
    let a1 = graded(half_r);
    let b1 = graded(half_c);
    let a2 = graded(half_r);
    let b2 = graded(half_c);
    let n = 1000.0;
    let base = 1.0 / (n_rows * n_cols) as f64;
    let mut values = vec![0.0; n_rows * n_cols];
    for i in 0..n_rows {
        for j in 0..n_cols {
            let mut z = base;
            if i < half_r && j < half_c {
                z += scale * a1[i] * b1[j];
            }
            if i >= half_r && j >= half_c {
                z += 0.7 * scale * a2[i - half_r] * b2[j - half_c];
            }
            assert!(z > 0.0, "planted deviation too large for positivity");
            values[i * n_cols + j] = n * z;
        }
    }
    let table = ContingencyTable::new(
        Matrix::new(n_rows, n_cols, values).unwrap(),
        labels("r", n_rows),
        labels("c", n_cols),
    )
    .unwrap();
    PlantedBlocks {
        table,
        row_supports: [
            (0..half_r).collect(),
            (half_r..n_rows).collect(),
        ],
        col_supports: [
            (0..half_c).collect(),
            (half_c..n_cols).collect(),
        ],
    }
}

/// Max absolute entry of `A^T A - I`.
pub fn orthonormality_residual(m: &Matrix) -> f64 {
    let gram = m.transpose().matmul(m).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.get(i, j) - expected).abs());
        }
    }
    worst
}

/// Max absolute difference between the rank-k subspace projectors of two
/// orthonormal column sets.
pub fn subspace_distance(a: &Matrix, b: &Matrix, k: usize) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.rows() {
        for j in 0..a.rows() {
            let mut pa = 0.0;
            let mut pb = 0.0;
            for l in 0..k {
                pa += a.get(i, l) * a.get(j, l);
                pb += b.get(i, l) * b.get(j, l);
            }
            worst = worst.max((pa - pb).abs());
        }
    }
    worst
}
