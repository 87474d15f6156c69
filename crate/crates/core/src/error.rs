use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters or preconditions supplied by the caller.
    Usage,
    /// Input data that cannot be parsed or is structurally unusable.
    Data,
    /// Overflow or non-convergence.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no windows of length {window} in corpus (order {order}, longest path has {max_len} nodes)")]
    EmptyModel {
        order: usize,
        window: usize,
        max_len: usize,
    },

    #[error("context {0} was never observed")]
    UnseenContext(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("node {0} has no successors at any order")]
    DeadEnd(String),

    #[error("path has {len} nodes but order {order} needs at least {}", order + 1)]
    PathTooShort { len: usize, order: usize },

    #[error("higher-order graph would exceed {cap} nodes at order {order}")]
    SizeCap { order: usize, cap: usize },

    #[error("shortest-path count overflowed 64 bits")]
    PathCountOverflow,

    #[error("walk count overflowed 128 bits at length {0}; an arbitrary-precision count is required")]
    WalkCountOverflow(usize),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate likelihood-ratio test: {0}")]
    DegenerateTest(String),

    #[error("nested likelihood decreased by {0:e}")]
    LikelihoodOrder(f64),

    #[error("ground truth has no mass")]
    EmptyGroundTruth,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter(_) | Error::PathTooShort { .. } | Error::SizeCap { .. } => ErrorKind::Usage,
            Error::PathCountOverflow
            | Error::WalkCountOverflow(_)
            | Error::NoConvergence { .. }
            | Error::LikelihoodOrder(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
