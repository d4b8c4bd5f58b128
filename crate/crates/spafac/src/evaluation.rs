//! Bootstrap confidence regions for group means and nearest-centroid
//! classification for the discriminant models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ca::{supplementary_row, CaModel, GroupDesign};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec {
            replicates: 1000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapSpec {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence {} must lie strictly between 0 and 1",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Percentile confidence ellipse of one group on one dimension pair.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConfidenceEllipse {
    pub dims: (usize, usize),
    pub center: (f64, f64),
    /// Unit directions of the two principal axes.
    pub axis_directions: [(f64, f64); 2],
    /// Half-lengths along the principal axes; zero for degenerate clouds.
    pub axis_lengths: (f64, f64),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GroupEllipse {
    pub group: String,
    /// Groups with fewer than 3 members get a region, flagged unreliable.
    pub unreliable: bool,
    pub ellipses: Vec<ConfidenceEllipse>,
}

/// SplitMix64 step, used to derive one independent stream seed per replicate
/// so evaluation order (or parallelism) cannot change the results.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ (replicate as u64).wrapping_mul(0xA076_1D64_78BD_642F)))
}

/// Bootstraps the group means of supplementary projections.
///
/// Each replicate resamples every group's observation rows with replacement,
/// sums them into a group profile, and projects that profile as a
/// supplementary row; the replicate cloud then yields a percentile ellipse
/// per requested dimension pair (axes from the cloud covariance, radius from
/// the `confidence` quantile of the Mahalanobis distances). Deterministic for
/// a fixed seed.
///
/// Reading non-overlapping ellipses as a significant group difference is a
/// heuristic convention, not a test statistic; the ellipse parameters are
/// returned so the caller can apply it. For sparse models the supplementary
/// projection is itself approximate, which inflates these regions.
pub fn bootstrap_group_means(
    model: &CaModel,
    observations: &Matrix,
    groups: &GroupDesign,
    spec: &BootstrapSpec,
    dim_pairs: &[(usize, usize)],
) -> Result<Vec<GroupEllipse>> {
    spec.validate()?;
    if observations.rows() != groups.len() {
        return Err(Error::GroupMismatch(format!(
            "design covers {} rows but the observations have {}",
            groups.len(),
            observations.rows()
        )));
    }
    if observations.cols() != model.x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "observations have {} columns, the model {}",
            observations.cols(),
            model.x.cols()
        )));
    }
    for &(a, b) in dim_pairs {
        if a >= model.rank() || b >= model.rank() {
            return Err(Error::DimensionMismatch(format!(
                "dimension pair ({a}, {b}) is outside the model rank {}",
                model.rank()
            )));
        }
    }

    let members: Vec<Vec<usize>> = {
        let mut m = vec![Vec::new(); groups.group_count()];
        for (i, &g) in groups.assignments().iter().enumerate() {
            m[g].push(i);
        }
        m
    };

    // replicate_scores[g][rep] = factor scores of the resampled group mean.
    let mut replicate_scores: Vec<Vec<Vec<f64>>> =
        vec![Vec::with_capacity(spec.replicates); groups.group_count()];
    for rep in 0..spec.replicates {
        let mut rng = replicate_rng(spec.seed, rep);
        for (g, rows) in members.iter().enumerate() {
            let mut profile = vec![0.0; observations.cols()];
            for _ in 0..rows.len() {
                let pick = rows[rng.gen_range(0..rows.len())];
                for (j, p) in profile.iter_mut().enumerate() {
                    *p += observations.get(pick, j);
                }
            }
            replicate_scores[g].push(supplementary_row(model, &profile)?);
        }
    }

    let mut out = Vec::with_capacity(groups.group_count());
    for (g, scores) in replicate_scores.iter().enumerate() {
        let mut ellipses = Vec::with_capacity(dim_pairs.len());
        for &(da, db) in dim_pairs {
            let points: Vec<(f64, f64)> = scores.iter().map(|s| (s[da], s[db])).collect();
            ellipses.push(percentile_ellipse(&points, spec.confidence, (da, db)));
        }
        out.push(GroupEllipse {
            group: groups.labels()[g].clone(),
            unreliable: members[g].len() < 3,
            ellipses,
        });
    }
    Ok(out)
}

fn percentile_ellipse(points: &[(f64, f64)], confidence: f64, dims: (usize, usize)) -> ConfidenceEllipse {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in points {
        sxx += (x - cx) * (x - cx);
        sxy += (x - cx) * (y - cy);
        syy += (y - cy) * (y - cy);
    }
    sxx /= n;
    sxy /= n;
    syy /= n;
    // Closed-form eigen-decomposition of the 2x2 covariance.
    let trace = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let gap = ((trace * trace / 4.0 - det).max(0.0)).sqrt();
    let l1 = (trace / 2.0 + gap).max(0.0);
    let l2 = (trace / 2.0 - gap).max(0.0);
    let dir1 = if sxy.abs() > 1e-300 {
        let v = (l1 - syy, sxy);
        let norm = (v.0 * v.0 + v.1 * v.1).sqrt();
        (v.0 / norm, v.1 / norm)
    } else if sxx >= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let dir2 = (-dir1.1, dir1.0);

    // Percentile radius: the `confidence` quantile of the axis-standardized
    // distances, so the ellipse covers that fraction of replicate means.
    let mut dists: Vec<f64> = points
        .iter()
        .map(|(x, y)| {
            let dx = x - cx;
            let dy = y - cy;
            let a = dx * dir1.0 + dy * dir1.1;
            let b = dx * dir2.0 + dy * dir2.1;
            let ra = if l1 > 1e-300 { a * a / l1 } else { 0.0 };
            let rb = if l2 > 1e-300 { b * b / l2 } else { 0.0 };
            (ra + rb).sqrt()
        })
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((confidence * dists.len() as f64).ceil() as usize)
        .clamp(1, dists.len())
        - 1;
    let scale = dists[idx];
    ConfidenceEllipse {
        dims,
        center: (cx, cy),
        axis_directions: [dir1, dir2],
        axis_lengths: (scale * l1.sqrt(), scale * l2.sqrt()),
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ClassificationReport {
    pub overall_accuracy: f64,
    pub per_group_accuracy: Vec<f64>,
    /// `1 / number of groups`.
    pub chance_level: f64,
    /// `confusion[true][predicted]`; rows sum to the group sizes.
    pub confusion: Vec<Vec<usize>>,
}

/// Assigns each observation (a row of raw counts) to the group whose factor
/// scores are closest in Euclidean distance over the retained dimensions,
/// after projecting the observation as a supplementary row.
pub fn classify_nearest_group(
    model: &CaModel,
    observations: &Matrix,
    true_groups: &GroupDesign,
) -> Result<ClassificationReport> {
    if !model.method.is_discriminant() {
        return Err(Error::InvalidConfig(
            "nearest-group classification needs a discriminant (disca/dimca) model".into(),
        ));
    }
    if observations.rows() != true_groups.len() {
        return Err(Error::GroupMismatch(format!(
            "design covers {} rows but the observations have {}",
            true_groups.len(),
            observations.rows()
        )));
    }
    let n_groups = model.x.rows();
    if true_groups.group_count() != n_groups {
        return Err(Error::GroupMismatch(format!(
            "model has {n_groups} groups, design has {}",
            true_groups.group_count()
        )));
    }
    let rank = model.rank();
    let mut confusion = vec![vec![0usize; n_groups]; n_groups];
    for i in 0..observations.rows() {
        let score = supplementary_row(model, observations.row(i))?;
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for g in 0..n_groups {
            let mut d = 0.0;
            for l in 0..rank {
                let diff = score[l] - model.f.get(g, l);
                d += diff * diff;
            }
            if d < best_dist {
                best_dist = d;
                best = g;
            }
        }
        confusion[true_groups.assignments()[i]][best] += 1;
    }
    let sizes = true_groups.sizes();
    let correct: usize = (0..n_groups).map(|g| confusion[g][g]).sum();
    let per_group_accuracy: Vec<f64> = (0..n_groups)
        .map(|g| {
            if sizes[g] == 0 {
                0.0
            } else {
                confusion[g][g] as f64 / sizes[g] as f64
            }
        })
        .collect();
    Ok(ClassificationReport {
        overall_accuracy: correct as f64 / observations.rows() as f64,
        per_group_accuracy,
        chance_level: 1.0 / n_groups as f64,
        confusion,
    })
}
