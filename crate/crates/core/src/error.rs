use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice specification: {0}")]
    InvalidSpec(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("vertex {0} is out of range")]
    UnknownVertex(VertexId),
    #[error("vertex set is empty")]
    EmptySet,
    #[error("initially white vertex {0} present; this operation requires p_w = 0")]
    WhiteVertexPresent(VertexId),
    #[error("vertex {0} is not initially green")]
    NotGreen(VertexId),
    #[error("vertex {0} is not initially red")]
    NotInitiallyRed(VertexId),
    #[error("no initially red vertex is reachable from vertex {0}")]
    NoRedReachable(VertexId),
    #[error("graph has {vertices} vertices, above the budget of {budget}")]
    VertexBudgetExceeded { vertices: usize, budget: usize },
    #[error("step budget exhausted after {0} selections")]
    BudgetExhausted(usize),
    #[error("{what} rate {rate:.4} exceeds the limit {limit}")]
    ThresholdExceeded { what: String, rate: f64, limit: f64 },
    #[error("box boundary not reached within {0} invasion steps")]
    BoundaryNotReached(usize),
    #[error("invalid stop rule: {0}")]
    InvalidStopRule(String),
    #[error("need at least {needed} grid points with positive survival, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
