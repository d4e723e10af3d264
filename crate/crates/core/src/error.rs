use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the counting primitives, estimators, simulators and the
/// Monte Carlo engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("invalid block scheme: {0}")]
    InvalidBlocks(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no upcrossings at this threshold")]
    NoUpcrossings,

    #[error("all blocks contain an exceedance; estimator undefined")]
    AllBlocksExceed,

    #[error("insufficient exceedances: need at least 2, found {0}")]
    InsufficientExceedances(usize),

    #[error("interexceedance times show no variability")]
    InsufficientVariability,

    #[error("invalid process spec: {0}")]
    InvalidProcess(String),

    #[error("true upcrossings index unknown for {0}; supply a reference value")]
    UnknownTruth(String),

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Whether the error marks an estimate that is undefined for a given
    /// sample, as opposed to a misconfigured call.
    pub fn is_undefined_estimate(&self) -> bool {
        matches!(
            self,
            Error::NoUpcrossings
                | Error::AllBlocksExceed
                | Error::InsufficientExceedances(_)
                | Error::InsufficientVariability
        )
    }
}
