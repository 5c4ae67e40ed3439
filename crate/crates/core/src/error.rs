use thiserror::Error;

/// Errors raised by the samplers, simulators and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite state at event {event} (t = {time}): {detail}")]
    NonFiniteEvent {
        event: usize,
        time: f64,
        detail: String,
    },

    #[error("non-finite state at step {step} (t = {time}): {detail}")]
    NonFiniteStep {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("sample size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("exact assignment requested for {0} atoms (limit is {max})", max = crate::measures::EXACT_DQ_MAX_ATOMS)]
    ExactTooLarge(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// `true` for failures caused by the numerics rather than the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteEvent { .. } | Error::NonFiniteStep { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
