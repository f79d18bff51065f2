use thiserror::Error;

/// Error taxonomy shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A symmetric-function quotient q_k = s_k / s_{k-1} has a vanishing
    /// denominator (within the configured threshold).
    #[error("undefined quotient: {0}")]
    UndefinedQuotient(String),

    /// A stated precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Numerical failure (eigensolver breakdown, self-check disagreement, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Geometric inconsistency: point off surface, invalid curve, ...
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Too few nodes for the requested stencil or operation.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Operation requested on a barrier kind that does not support it.
    #[error("unsupported barrier: {0}")]
    UnsupportedBarrier(String),

    /// A runtime invariant that should hold by theory failed numerically.
    #[error("consistency failure: {0}")]
    Consistency(String),

    /// Degenerate input (identically zero test function, empty data, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Time step violates the stability bound.
    #[error("step size error: {0}")]
    StepSize(String),

    /// Run configuration is missing, malformed, or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Persisted file carries an incompatible schema version.
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
