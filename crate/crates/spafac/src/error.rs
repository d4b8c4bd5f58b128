//! Crate-wide error type and the exit-code mapping used by the `spafac` binary.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// CSV or numeric parsing failed; `line`/`column` are 1-based file coordinates.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("negative count at line {line}, column {column}")]
    NegativeCount { line: usize, column: usize },

    #[error("missing cell at line {line}, column {column}; imputation is not supported")]
    MissingCell { line: usize, column: usize },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("group partition covers {partition} coordinates but the vector has {vector}")]
    PartitionMismatch { partition: usize, vector: usize },

    #[error("table is empty or has a zero grand total")]
    EmptyTable,

    /// A zero row or column mass makes the inverse-mass metric undefined.
    #[error("zero {axis} margin at index {index} ({label}); re-run with --drop-empty to remove it")]
    ZeroMarginal {
        axis: &'static str,
        index: usize,
        label: String,
    },

    #[error("invalid disjunctive coding: row {row} of variable {variable:?} does not sum to 1")]
    InvalidCoding { row: usize, variable: String },

    #[error("level {label:?} is never observed; re-bin the variable before analysis")]
    EmptyLevel { label: String },

    #[error("group design mismatch: {0}")]
    GroupMismatch(String),

    #[error("sparsity radius {radius} is outside [1, sqrt(dim)] = [1, {max:.4}]")]
    InvalidRadius { radius: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("column has {distinct} distinct values, fewer than the {bins} requested bins")]
    TooFewDistinct { distinct: usize, bins: usize },

    #[error("supplementary element has zero total and no profile")]
    ZeroSupplementary,

    #[error("sparse transition formulas need the estimation order, which is unavailable")]
    OrderUnavailable,

    #[error("reference spectrum is all zero; fit ratio is undefined")]
    DivisionByZero,

    #[error("reference decomposition has a degenerate (all-zero) spectrum")]
    DegenerateReference,

    #[error("{0} did not converge within the iteration budget")]
    NonConvergence(String),

    /// The POCS iterate collapsed to the zero vector: the requested constraints
    /// cannot be satisfied jointly on this input.
    #[error("infeasible constraints while estimating dimension {dimension}")]
    InfeasibleConstraints { dimension: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 = parse, 3 = validation,
    /// 4 = non-convergence, 5 = infeasible constraints, 1 = everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::NegativeCount { .. } | Error::MissingCell { .. } => 2,
            Error::NonFinite { .. }
            | Error::DimensionMismatch(_)
            | Error::PartitionMismatch { .. }
            | Error::EmptyTable
            | Error::ZeroMarginal { .. }
            | Error::InvalidCoding { .. }
            | Error::EmptyLevel { .. }
            | Error::GroupMismatch(_)
            | Error::InvalidRadius { .. }
            | Error::InvalidConfig(_)
            | Error::TooFewDistinct { .. }
            | Error::ZeroSupplementary
            | Error::OrderUnavailable
            | Error::DivisionByZero
            | Error::DegenerateReference => 3,
            Error::NonConvergence(_) => 4,
            Error::InfeasibleConstraints { .. } => 5,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
