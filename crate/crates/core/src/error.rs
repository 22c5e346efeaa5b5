use thiserror::Error;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Invalid(ValidationReport),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("{what} size {got} exceeds the configured limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("node count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("nodeweights differ at node {0}")]
    NodeweightMismatch(usize),
    #[error("node {0} appears in both S and T")]
    Overlap(usize),
    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeIndex { index: usize, n: usize },
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("loss diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ValidationReport> for Error {
    fn from(report: ValidationReport) -> Self {
        Error::Invalid(report)
    }
}
