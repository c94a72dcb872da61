use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} outside table range 1..={n_max}")]
    OutOfRange { index: u64, n_max: u64 },

    #[error("table of size {requested} needs ~{bytes} bytes, over the {budget} byte budget")]
    Capacity {
        requested: u64,
        bytes: u128,
        budget: u128,
    },

    #[error("integer overflow while computing {0}")]
    Overflow(String),

    #[error("{what}: cost {cost} exceeds the configured budget {budget}")]
    CostGuard { what: String, cost: u128, budget: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("table file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
