//! Serializable result bundle and the CSV emitters. The JSON schema is
//! versioned and round-trips losslessly; plots are rendered from this bundle
//! only, never from live state.

use std::io::Write;
use std::path::Path;

use crate::ca::{CaModel, PropertyReport};
use crate::error::Result;
use crate::evaluation::{ClassificationReport, GroupEllipse};
use crate::matrix::Matrix;
use crate::tuning::{SparsityIndices, TuningGrid};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SparsitySummary {
    pub row_fraction: f64,
    pub col_fraction: f64,
    pub indices: Option<SparsityIndices>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DimensionSummary {
    pub iterations: usize,
    pub converged: bool,
    pub orthogonality_residual: f64,
    pub group_norm_excess: f64,
    pub l2_excess: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SupplementaryBlock {
    pub labels: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ResultBundle {
    pub schema_version: u32,
    pub method: String,
    pub sparse: bool,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub converged: bool,
    /// Singular values in display order (decreasing).
    pub singular_values: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub percent_inertia: Vec<f64>,
    /// Total inertia of the analyzed matrix (chi-squared over N).
    pub inertia: f64,
    /// Sparse runs: which estimation pass produced each displayed dimension,
    /// and the spectrum in estimation order.
    pub estimation_order: Option<Vec<usize>>,
    pub singular_values_estimation_order: Option<Vec<f64>>,
    pub sparsity: Option<SparsitySummary>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_scores: Vec<Vec<f64>>,
    pub col_scores: Vec<Vec<f64>>,
    pub row_contributions: Vec<Vec<f64>>,
    pub col_contributions: Vec<Vec<f64>>,
    pub properties: Option<PropertyReport>,
    pub tuning: Option<TuningGrid>,
    pub supplementary_rows: Option<SupplementaryBlock>,
    pub classification: Option<ClassificationReport>,
    pub bootstrap: Option<Vec<GroupEllipse>>,
    pub diagnostics: Vec<DimensionSummary>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

impl ResultBundle {
    /// Core fields from a fitted model; pipeline-level blocks (tuning,
    /// classification, bootstrap, supplementary) start out empty.
    pub fn from_model(model: &CaModel, seed: u64) -> Self {
        let delta = model.decomposition.delta().to_vec();
        let diagnostics = match model.decomposition.sparse() {
            Some(sparse) => sparse
                .dimensions
                .iter()
                .map(|d| DimensionSummary {
                    iterations: d.iterations,
                    converged: d.converged,
                    orthogonality_residual: d
                        .row_residuals
                        .orthogonality
                        .max(d.col_residuals.orthogonality),
                    group_norm_excess: d
                        .row_residuals
                        .group_excess
                        .max(d.col_residuals.group_excess),
                    l2_excess: d.row_residuals.l2_excess.max(d.col_residuals.l2_excess),
                })
                .collect(),
            None => match &model.decomposition {
                crate::ca::Decomposition::Plain(plain) => plain
                    .iterations
                    .iter()
                    .zip(plain.converged.iter())
                    .map(|(&iterations, &converged)| DimensionSummary {
                        iterations,
                        converged,
                        orthogonality_residual: 0.0,
                        group_norm_excess: 0.0,
                        l2_excess: 0.0,
                    })
                    .collect(),
                crate::ca::Decomposition::Sparse(_) => unreachable!(),
            },
        };
        let (estimation_order, est_delta) = match model.decomposition.sparse() {
            Some(sparse) => (
                Some(sparse.estimation_order.clone()),
                Some(sparse.delta_hat_estimation_order()),
            ),
            None => (None, None),
        };
        ResultBundle {
            schema_version: SCHEMA_VERSION,
            method: model.method.name().to_string(),
            sparse: model.is_sparse(),
            rows: model.x.rows(),
            cols: model.x.cols(),
            rank: model.rank(),
            converged: model.decomposition.all_converged(),
            singular_values: delta,
            eigenvalues: model.eigenvalues(),
            percent_inertia: model.percent_inertia(),
            inertia: model.total_inertia(),
            estimation_order,
            singular_values_estimation_order: est_delta,
            sparsity: None,
            row_labels: model.row_labels.clone(),
            col_labels: model.col_labels.clone(),
            row_scores: matrix_rows(&model.f),
            col_scores: matrix_rows(&model.g),
            row_contributions: matrix_rows(&model.row_contributions),
            col_contributions: matrix_rows(&model.col_contributions),
            properties: None,
            tuning: None,
            supplementary_rows: None,
            classification: None,
            bootstrap: None,
            diagnostics,
            seed,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn score_header(rank: usize) -> Vec<String> {
    (1..=rank).map(|l| format!("dim{l}")).collect()
}

/// `label,dim1,...,dimR` rows.
pub fn write_scores_csv<P: AsRef<Path>>(
    path: P,
    labels: &[String],
    scores: &[Vec<f64>],
) -> Result<()> {
    let rank = scores.first().map_or(0, |r| r.len());
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(crate::error::Error::from)?;
    let mut header = vec!["label".to_string()];
    header.extend(score_header(rank));
    w.write_record(&header)?;
    for (label, row) in labels.iter().zip(scores.iter()) {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Row and column contributions stacked with a `side` discriminator.
pub fn write_contributions_csv<P: AsRef<Path>>(
    path: P,
    bundle: &ResultBundle,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(crate::error::Error::from)?;
    let mut header = vec!["side".to_string(), "label".to_string()];
    header.extend(score_header(bundle.rank));
    w.write_record(&header)?;
    for (label, row) in bundle.row_labels.iter().zip(bundle.row_contributions.iter()) {
        let mut record = vec!["row".to_string(), label.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&record)?;
    }
    for (label, row) in bundle.col_labels.iter().zip(bundle.col_contributions.iter()) {
        let mut record = vec!["col".to_string(), label.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per tuning cell with the seven indices and the zone; failed cells
/// carry the error text instead.
pub fn write_tuning_csv<P: AsRef<Path>>(path: P, grid: &TuningGrid) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(crate::error::Error::from)?;
    w.write_record([
        "row_fraction",
        "col_fraction",
        "rank",
        "zero_ratio_rows",
        "zero_ratio_cols",
        "zero_ratio",
        "fit",
        "index_rows",
        "index_cols",
        "index",
        "zone",
        "best",
        "error",
    ])?;
    for (i, cell) in grid.cells.iter().enumerate() {
        let best = if grid.best == Some(i) { "yes" } else { "" };
        match &cell.indices {
            Some(s) => w.write_record([
                format!("{}", cell.row_fraction),
                format!("{}", cell.col_fraction),
                format!("{}", cell.rank),
                format!("{}", s.zero_ratio_rows),
                format!("{}", s.zero_ratio_cols),
                format!("{}", s.zero_ratio),
                format!("{}", s.fit),
                format!("{}", s.index_rows),
                format!("{}", s.index_cols),
                format!("{}", s.index),
                format!("{}", s.zone.number()),
                best.to_string(),
                String::new(),
            ])?,
            None => w.write_record([
                format!("{}", cell.row_fraction),
                format!("{}", cell.col_fraction),
                format!("{}", cell.rank),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                best.to_string(),
                cell.error.clone().unwrap_or_default(),
            ])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a string to a file, creating parent directories as needed.
pub fn write_text<P: AsRef<Path>>(path: P, text: &str) -> Result<()> {
    if let Some(parent) = path.as_ref().parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
