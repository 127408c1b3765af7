use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("self-loop on node {node} at line {line}")]
    SelfLoop { line: usize, node: u64 },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is not connected")]
    Disconnected,

    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),

    #[error("weight at node {node} is not positive ({value})")]
    NonPositiveWeight { node: usize, value: f64 },

    #[error("attribute at node {node} is not positive ({value})")]
    NonPositiveAttribute { node: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step size {epsilon} outside (0, {bound})")]
    StepSizeOutOfRange { epsilon: f64, bound: f64 },

    #[error("min-consensus did not stabilize within {0} rounds")]
    MinConsensusStalled(usize),

    #[error("matrix is not symmetric (|a_ij - a_ji| = {0})")]
    Asymmetric(f64),

    #[error("convergence rate not estimable: {0}")]
    NotEstimable(String),

    #[error("attribute file: {0}")]
    Attributes(String),

    #[error("invalid metric spec: {0}")]
    MetricSpec(String),
}
