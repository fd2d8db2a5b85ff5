use thiserror::Error;

/// Errors surfaced by the channel-modeling library.
#[derive(Debug, Error)]
pub enum FhtError {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or grid specification was invalid.
    #[error("config error: {0}")]
    Config(String),

    /// A scenario file failed to parse; carries the offending line number.
    #[error("scenario parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A discrete path did not satisfy the requirements of a diagnostic.
    #[error("resample error: {0}")]
    Resample(String),

    /// A statistic was requested on data that cannot support it.
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    /// A trajectory produced a non-finite state during integration.
    #[error("internal error: non-finite state in trajectory {trajectory}")]
    NonFiniteState { trajectory: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FhtError>;
