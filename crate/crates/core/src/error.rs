use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("expected a {expected}-dimensional point, got {got} coordinates")]
    Dimension { expected: usize, got: usize },

    #[error("round {got} is out of order, expected round {expected}")]
    OutOfOrder { expected: u64, got: u64 },

    #[error("pull({t}) called while round {pending} still awaits its reward")]
    MissingReward { t: u64, pending: u64 },

    #[error("receive_reward({t}) does not match a pending pull")]
    UnmatchedReward { t: u64 },

    #[error("reward {0} is not finite")]
    NonFiniteReward(f64),

    #[error("no recommendation available before the first completed round")]
    NoRecommendation,

    #[error("node ({depth}, {index}) has already been split")]
    AlreadySplit { depth: usize, index: u128 },

    #[error("node ({depth}, {index}) cannot be split further")]
    Unsplittable { depth: usize, index: u128 },

    #[error("node ({depth}, {index}) has not been evaluated")]
    Unevaluated { depth: usize, index: u128 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("budget {budget} is too small: {reason}")]
    BudgetTooSmall { budget: u64, reason: String },

    #[error("unknown {kind} `{name}`; valid names: {}", valid.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
