use thiserror::Error;

use crate::model::Axis;

/// Every failure the library reports.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// caller worked in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("table is not rectangular: row {row} has {found} entries, expected {expected}")]
    NotRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("table is empty")]
    EmptyTable,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entries sum to {sum}, which is not 1 within {tolerance}")]
    SumNotOne { sum: f64, tolerance: f64 },

    #[error(
        "assumption one violated: need at least two positive-mass rows and columns, \
         found {positive_rows} rows and {positive_cols} columns"
    )]
    AssumptionOneViolated {
        positive_rows: usize,
        positive_cols: usize,
    },

    #[error("bad concentration: {0}")]
    BadConcentration(String),

    #[error("selection probability {0} is not in the open interval (0, 1)")]
    BadSelection(f64),

    #[error("{axis} marginal has zero mass at state {index}")]
    ZeroMarginal { axis: Axis, index: usize },

    #[error("joint has zero-mass cells; pass the support-restriction policy to analyse it")]
    NotStrictlyPositive,

    #[error("proposal acts on {found}, expected {expected}")]
    AxisMismatch { expected: Axis, found: Axis },

    #[error("invalid proposal: {0}")]
    InvalidProposal(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("stationary distribution has zero mass at state {state}")]
    ZeroStationaryMass { state: usize },

    #[error("eigen/singular value solver did not converge on a {dim}x{dim} matrix")]
    EigenSolverFailure { dim: usize },

    #[error("largest singular value of the normalized joint is {value}, not 1")]
    TopSingularValueNotOne { value: f64 },

    #[error("condition constant is infinite for the {axis}-axis proposal")]
    InfiniteConditionConstant { axis: Axis },

    #[error("window contains a zero distance at n = {n}; the chain reached stationarity exactly")]
    ZeroDistanceInWindow { n: usize },

    #[error("missing input: {0}")]
    MissingInput(&'static str),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
