use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex not in graph: {0}")]
    UnknownVertex(VertexId),

    #[error("function not defined on neighborhood of {0}")]
    FunctionUndefined(VertexId),

    #[error("support not finite")]
    InfiniteSupport,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("matrix not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric (entry ({row},{col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("dipole undefined at base point")]
    DipoleAtBase,

    #[error("degenerate bipole: both endpoints are {0}")]
    DegenerateBipole(VertexId),

    #[error("section too small: {0}")]
    SectionTooSmall(String),

    #[error("invalid section: {0}")]
    InvalidSection(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("insufficient filtration depth: need at least {needed} levels, got {got}")]
    InsufficientDepth { needed: usize, got: usize },

    #[error("not graph-compatible: positive cross term at ({0}, {1})")]
    PositiveCrossTerm(VertexId, VertexId),

    #[error("row-sum identity fails at {vertex}: residual {residual:e}")]
    RowSumViolation { vertex: VertexId, residual: f64 },

    #[error("shooting requires chain: {0}")]
    NotAChain(String),

    #[error("scan defined for semibounded probe only (lambda = {0} must be negative)")]
    NonNegativeProbe(f64),

    #[error("order not supported: {0} (maximum 3)")]
    UnsupportedOrder(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
