use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms: {what}")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("infrared divergence: D=1 requires a positive mass")]
    InfraredDivergence,

    #[error("commutator violation: symplectic product deviates from the canonical form by {deviation:.3e} at ({row}, {col})")]
    CommutatorViolation {
        deviation: f64,
        row: usize,
        col: usize,
    },

    #[error("numerical degeneracy: {0}")]
    Degeneracy(String),

    #[error("no entanglement threshold in the bracket [0, {0}]")]
    NoThreshold(f64),

    #[error("invalid mode {index}: {reason}")]
    InvalidMode { index: usize, reason: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
