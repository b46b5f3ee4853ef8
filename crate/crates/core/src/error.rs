use alloc::string::String;

/// Errors produced by the learning pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("node index {index} out of range for {p} nodes")]
    NodeOutOfRange { index: usize, p: usize },
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    #[error("value outside domain: {0}")]
    Domain(&'static str),
    #[error("no admissible cut point: {0}")]
    InfeasibleFit(&'static str),
    #[error("directed part of the graph contains a cycle")]
    Cyclic,
    #[error("graph admits no consistent DAG extension")]
    Inextensible,
    #[error("graphs have different node counts ({0} vs {1})")]
    NodeCountMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
