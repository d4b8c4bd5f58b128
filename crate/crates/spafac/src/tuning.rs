//! Sparsity/fit indices, the five-zone map, and the grid search over radius
//! fractions and rank that picks the sparsest well-fitting solution.

use crate::als::als_gsvd;
use crate::ca::{fit_prepared, CaModel, Decomposition, FitOptions, Prepared, SparsitySpec};
use crate::error::{Error, Result};
use crate::matrix::DiagonalMetric;
use crate::projectors::PocsPriority;
use crate::sparse::{fit_ratio, SparseGsvdResult};
use crate::als::GsvdResult;

/// Zone of the fit-versus-zero-ratio map. Zones 1-3 have a low sparsity
/// index because one or both ratios sit near zero, zone 4 is the near-ideal
/// corner, zone 5 the useful compromise region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Zone {
    /// Zone 1: both the zero ratio and the fit are near zero.
    BothNearZero,
    /// Zone 2: no sparsity to speak of, whatever the fit.
    SparsityNearZero,
    /// Zone 3: sparse but explains almost nothing.
    FitNearZero,
    /// Zone 4: very sparse and still fitting, index near its maximum.
    BothHigh,
    /// Zone 5: the compromise region in the middle.
    Compromise,
}

impl Zone {
    pub fn number(&self) -> u8 {
        match self {
            Zone::BothNearZero => 1,
            Zone::SparsityNearZero => 2,
            Zone::FitNearZero => 3,
            Zone::BothHigh => 4,
            Zone::Compromise => 5,
        }
    }
}

/// Thresholds carving the unit square into the five zones. The map itself is
/// qualitative; these defaults are configurable.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ZoneThresholds {
    pub near_zero: f64,
    pub high: f64,
}

impl Default for ZoneThresholds {
    fn default() -> Self {
        ZoneThresholds {
            near_zero: 0.1,
            high: 0.9,
        }
    }
}

/// Places a `(zero ratio, fit)` pair into its zone.
pub fn classify_zone(zero_ratio: f64, fit: f64, thresholds: &ZoneThresholds) -> Zone {
    let lo = thresholds.near_zero;
    let hi = thresholds.high;
    if zero_ratio < lo && fit < lo {
        Zone::BothNearZero
    } else if zero_ratio < lo {
        Zone::SparsityNearZero
    } else if fit < lo {
        Zone::FitNearZero
    } else if zero_ratio >= hi && fit >= hi {
        Zone::BothHigh
    } else {
        Zone::Compromise
    }
}

/// The seven statistics of a sparse solution: zero ratios over P, Q, and
/// both; the fit ratio; and their products, the sparsity indices.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SparsityIndices {
    pub zero_ratio_rows: f64,
    pub zero_ratio_cols: f64,
    pub zero_ratio: f64,
    pub fit: f64,
    pub index_rows: f64,
    pub index_cols: f64,
    pub index: f64,
    pub zone: Zone,
}

/// Computes the sparsity indices of a sparse decomposition against its plain
/// reference over the first `l` dimensions. Zero counting relies on the
/// exact zeros the projector stores.
pub fn sparsity_indices(
    result: &SparseGsvdResult,
    reference: &GsvdResult,
    l: usize,
    thresholds: &ZoneThresholds,
) -> Result<SparsityIndices> {
    if l == 0 || l > result.rank() || l > reference.rank() {
        return Err(Error::DimensionMismatch(format!(
            "indices over {l} dimensions need both decompositions to have at least {l}"
        )));
    }
    if reference.delta.iter().take(l).all(|d| *d == 0.0) {
        return Err(Error::DegenerateReference);
    }
    let nrows = result.p.rows();
    let ncols = result.q.rows();
    let zeros_p = result.zero_count_p(l);
    let zeros_q = result.zero_count_q(l);
    let zero_ratio_rows = zeros_p as f64 / (nrows * l) as f64;
    let zero_ratio_cols = zeros_q as f64 / (ncols * l) as f64;
    let zero_ratio = (zeros_p + zeros_q) as f64 / ((nrows + ncols) * l) as f64;
    let fit = fit_ratio(result, reference, l)?;
    Ok(SparsityIndices {
        zero_ratio_rows,
        zero_ratio_cols,
        zero_ratio,
        fit,
        index_rows: zero_ratio_rows * fit,
        index_cols: zero_ratio_cols * fit,
        index: zero_ratio * fit,
        zone: classify_zone(zero_ratio, fit, thresholds),
    })
}

/// Which of the three sparsity indices drives the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum IndexSelector {
    Rows,
    Cols,
    Both,
}

impl IndexSelector {
    fn pick(&self, s: &SparsityIndices) -> f64 {
        match self {
            IndexSelector::Rows => s.index_rows,
            IndexSelector::Cols => s.index_cols,
            IndexSelector::Both => s.index,
        }
    }
}

/// Candidate grid: radius fractions of `sqrt(dim)` per side and ranks.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub row_fractions: Vec<f64>,
    pub col_fractions: Vec<f64>,
    pub ranks: Vec<usize>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub priority: PocsPriority,
    pub thresholds: ZoneThresholds,
}

impl GridSpec {
    pub fn new(row_fractions: Vec<f64>, col_fractions: Vec<f64>, ranks: Vec<usize>) -> Self {
        GridSpec {
            row_fractions,
            col_fractions,
            ranks,
            epsilon: crate::als::DEFAULT_EPSILON,
            max_iter: crate::als::DEFAULT_MAX_ITER,
            priority: PocsPriority::SparsityLast,
            thresholds: ZoneThresholds::default(),
        }
    }

    /// Fractions 0.1, 0.2, ..., 1.0 on both sides.
    pub fn default_fractions() -> Vec<f64> {
        (1..=10).map(|k| k as f64 / 10.0).collect()
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TuningCell {
    pub row_fraction: f64,
    pub col_fraction: f64,
    pub rank: usize,
    pub indices: Option<SparsityIndices>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TuningGrid {
    pub cells: Vec<TuningCell>,
    /// Index into `cells` of the argmax by the selected index; `None` when
    /// every cell failed. Ties resolve toward smaller row fraction, then
    /// smaller column fraction, then smaller rank (the iteration order).
    pub best: Option<usize>,
    pub selector: IndexSelector,
}

impl TuningGrid {
    pub fn best_cell(&self) -> Option<&TuningCell> {
        self.best.map(|i| &self.cells[i])
    }
}

/// Fits one sparse model per `(row fraction, column fraction, rank)` cell,
/// scores each against the plain reference of matching rank, and returns the
/// grid with its argmax. Failed cells are recorded and skipped, not fatal.
/// Deterministic: every fit starts from the plain decomposition.
pub fn grid_search(prep: &Prepared, spec: &GridSpec, selector: IndexSelector) -> Result<TuningGrid> {
    if spec.row_fractions.is_empty() || spec.col_fractions.is_empty() || spec.ranks.is_empty() {
        return Err(Error::InvalidConfig("empty tuning grid".into()));
    }
    let max_rank = *spec.ranks.iter().max().unwrap();
    let bound = prep.x.rows().min(prep.x.cols());
    if max_rank == 0 || max_rank > bound {
        return Err(Error::InvalidConfig(format!(
            "grid rank {max_rank} is outside 1..={bound}"
        )));
    }
    let row_metric = DiagonalMetric::inverse_of(&prep.row_masses)?;
    let col_metric = DiagonalMetric::inverse_of(&prep.col_masses)?;
    let reference = als_gsvd(
        &prep.x,
        &row_metric,
        &col_metric,
        max_rank,
        spec.epsilon,
        spec.max_iter,
    )?;

    let mut cells = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for &rf in &spec.row_fractions {
        for &cf in &spec.col_fractions {
            for &rank in &spec.ranks {
                let options = FitOptions {
                    rank: Some(rank),
                    epsilon: spec.epsilon,
                    max_iter: spec.max_iter,
                    priority: spec.priority,
                    sparsity: Some(SparsitySpec::fractions(rf, cf)),
                };
                let outcome = fit_prepared(prep, &options).and_then(|model| {
                    let sparse = match &model.decomposition {
                        Decomposition::Sparse(s) => s.clone(),
                        Decomposition::Plain(_) => unreachable!("sparsity was requested"),
                    };
                    sparsity_indices(&sparse, &reference, rank, &spec.thresholds)
                });
                let cell_index = cells.len();
                match outcome {
                    Ok(indices) => {
                        let score = selector.pick(&indices);
                        if best.map_or(true, |(_, b)| score > b) {
                            best = Some((cell_index, score));
                        }
                        cells.push(TuningCell {
                            row_fraction: rf,
                            col_fraction: cf,
                            rank,
                            indices: Some(indices),
                            error: None,
                        });
                    }
                    Err(e) => cells.push(TuningCell {
                        row_fraction: rf,
                        col_fraction: cf,
                        rank,
                        indices: None,
                        error: Some(e.to_string()),
                    }),
                }
            }
        }
    }
    Ok(TuningGrid {
        cells,
        best: best.map(|(i, _)| i),
        selector,
    })
}

/// Refits the model at the best grid cell.
pub fn fit_best(prep: &Prepared, grid: &TuningGrid, spec: &GridSpec) -> Result<CaModel> {
    let cell = grid
        .best_cell()
        .ok_or_else(|| Error::InvalidConfig("every tuning cell failed".into()))?;
    let options = FitOptions {
        rank: Some(cell.rank),
        epsilon: spec.epsilon,
        max_iter: spec.max_iter,
        priority: spec.priority,
        sparsity: Some(SparsitySpec::fractions(cell.row_fraction, cell.col_fraction)),
    };
    fit_prepared(prep, &options)
}
