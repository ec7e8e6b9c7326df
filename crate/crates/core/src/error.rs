use thiserror::Error;

/// Errors raised by the channel computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("derivative undefined at q = {q}: zero dark current makes the log terms diverge")]
    Domain { q: f64 },

    #[error("slot width {delta} too large: transition probability {prob} exceeds 1")]
    SlotTooWide { delta: f64, prob: f64 },

    #[error("samples must have strictly increasing q (violated at index {index})")]
    UnsortedSamples { index: usize },

    #[error("{operation} requires a {required} channel, got {actual}")]
    RegimeMismatch {
        operation: &'static str,
        required: &'static str,
        actual: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
