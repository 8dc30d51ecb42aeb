use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate `{field}` must be strictly positive and finite, got {value}")]
    NonPositiveRate { field: &'static str, value: f64 },

    #[error("`{field}` must be strictly positive and finite, got {value}")]
    NonPositiveRewardCost { field: &'static str, value: f64 },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("state n={n} is unreachable under strategy {strategy}")]
    UnreachableState { n: u64, strategy: String },

    #[error("no closed-form benefit for strategy {0}")]
    UnsupportedStrategy(String),

    #[error("threshold scan exceeded {limit} levels")]
    ScanLimitExceeded { limit: u64 },

    #[error("F({n0}, theta) has no root with theta in (0,1)")]
    NoInteriorRoot { n0: u64 },

    #[error("invalid simulation setting: {0}")]
    InvalidSimulation(String),

    #[error("balance system is singular")]
    SingularSystem,

    #[error("negative stationary mass {value:e} at (n={n}, e={env})")]
    InconsistentMass { n: u64, env: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
