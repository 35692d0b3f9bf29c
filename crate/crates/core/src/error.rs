use thiserror::Error;

/// Errors surfaced by samplers, estimators and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("model {model} does not support this operation: {reason}")]
    UnsupportedModel { model: String, reason: String },

    #[error("box of {vertices} vertices exceeds the sampler limit of {limit}")]
    BoxTooLarge { vertices: u128, limit: u64 },

    #[error(
        "expected open-edge count ~{expected:.3e} exceeds the cap of {cap} \
         (raise the cap or shrink the box)"
    )]
    EdgeCapExceeded { expected: f64, cap: u64 },

    #[error("enumeration budget exceeded: {detail}")]
    BudgetExceeded { detail: String },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("empty or too-small input: {0}")]
    BadInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
