use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument outside the operation's domain.
    #[error("invalid {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The requested representation does not exist for this configuration
    /// (for example an ESN posterior when the bound is deterministic).
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    /// Rejection sampling would essentially never accept.
    #[error("degenerate tail: acceptance probability {acceptance:e} is below {floor:e}")]
    DegenerateTail { acceptance: f64, floor: f64 },

    #[error("no sign change of the risk difference bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("unknown estimator id `{0}`")]
    UnknownEstimator(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
