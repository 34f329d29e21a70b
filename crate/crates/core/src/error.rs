use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution is not normalized (total mass {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial has degree {degree} but only {samples} samples are available; no unbiased estimator exists")]
    InsufficientSamples { degree: usize, samples: u64 },

    #[error("monomial of degree {found} exceeds target degree {target}")]
    DegreeTooHigh { found: usize, target: usize },

    #[error("enumeration budget exceeded: {0} outcomes")]
    EnumerationBudget(u128),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
