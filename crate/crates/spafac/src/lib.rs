//! Sparse factor analysis for categorical data.
//!
//! The crate decomposes contingency tables and disjunctively coded
//! questionnaires with correspondence analysis (CA), multiple correspondence
//! analysis (MCA), and their discriminant variants (DiSCA, DiMCA), in both
//! plain and sparse form. Sparsity comes from a group-sparse generalized SVD:
//! an alternating power iteration whose half-steps are projected onto the
//! intersection of a unit sphere, a group-norm ball, and the orthocomplement
//! of the previously accepted vectors, so components stay orthogonal while
//! loadings shrink to exact zeros.
//!
//! The `examples/` directory shows one runnable program per capability; the
//! thin `spafac` binary drives the same pipeline from CSV files.

pub mod als;
pub mod bundle;
pub mod ca;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod matrix;
pub mod projectors;
pub mod sparse;
pub mod svg;
pub mod tuning;

pub use als::{als_gsvd, als_svd, inertia, GsvdResult, SvdResult};
pub use ca::{
    asymmetric_scores, check_properties, fit_ca, fit_dimca, fit_disca, fit_mca, fit_prepared,
    preprocess_ca, preprocess_dimca, preprocess_disca, preprocess_mca, supplementary_col,
    supplementary_row, transition_col_from_row, transition_row_from_col, CaMethod, CaModel,
    ContingencyTable, Decomposition, DisjunctiveTable, FitOptions, GroupDesign, Prepared,
    PropertyReport, SparsitySpec, VariableSpan,
};
pub use error::{Error, Result};
pub use evaluation::{
    bootstrap_group_means, classify_nearest_group, BootstrapSpec, ClassificationReport,
    ConfidenceEllipse, GroupEllipse,
};
pub use bundle::ResultBundle;
pub use cli::{parse_args, run, RunConfig, RunOutcome};
pub use ingest::{bin_numeric, ingest_categorical, ingest_contingency, BinSpec};
pub use matrix::{weighted_transform, DiagonalMetric, Matrix};
pub use projectors::{
    pocs_project, pocs_project_saturated, proj_group_ball, proj_l1_ball, proj_l2_ball,
    proj_orthocomplement, GroupPartition, OrthoBasis, PocsPriority, SparsityConstraint,
};
pub use sparse::{csvd, fit_ratio, gsgsvd, sgsvd, SparseGsvdConfig, SparseGsvdResult};
pub use tuning::{
    classify_zone, fit_best, grid_search, sparsity_indices, GridSpec, IndexSelector,
    SparsityIndices, TuningCell, TuningGrid, Zone, ZoneThresholds,
};
