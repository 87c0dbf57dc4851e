use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("node index {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contract violation: {0}")]
    Contract(&'static str),
    #[error("{what} of size {size} exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("unknown attribute column `{0}`")]
    MissingColumn(String),
    #[error("attribute column `{0}` has no observed values")]
    EmptyColumn(String),
    #[error("series is empty after dropping zero observations")]
    EmptySeries,
    #[error("series supports do not intersect")]
    IncomparableSupports,
    #[error("series supports share a single point; the log-L2 window is empty")]
    DegenerateSupport,
    #[error("singular value iteration did not converge after {steps} steps (residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64 },
    #[error("largest singular value is not simple (gap {gap:e})")]
    DegenerateTopValue { gap: f64 },
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("lower bound became non-finite ({value}) in EM round {round}")]
    NonFinite { round: usize, value: f64 },
    #[error("logistic regression did not converge (gradient norm {grad_norm:e})")]
    LogisticNoConvergence { grad_norm: f64 },
}
