use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("target is not log-concave near x = {x}: log density {observed} exceeds envelope {envelope}")]
    LogConcavityViolated { x: f64, observed: f64, envelope: f64 },

    #[error("could not bracket the mode of the target: {0}")]
    Bracketing(String),

    #[error("chain output sink failed: {0}")]
    Sink(String),

    #[error("chain has no draws after discarding burn-in")]
    EmptyChain,

    #[error("chain aborted after {rejections} consecutive rejections at sweep {sweep}")]
    ChainAborted { sweep: usize, rejections: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
