use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid access probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("dimension mismatch: expected {expected} resource blocks, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("enumeration needs {required} occupancy pairs, cap is {cap}; use the closed form")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("action space would hold {required} actions, cap is {cap}")]
    SpaceTooLarge { required: u128, cap: u128 },

    #[error("reward scaling undefined: {0}")]
    ScalingUndefined(String),

    #[error("infeasible: best attained L-UE throughput {best_mu_l:.6} is below gamma {gamma}")]
    Infeasible { gamma: f64, best_mu_l: f64 },

    #[error("action space is not a compact lookup table")]
    NotCompact,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
