use thiserror::Error;

/// Errors raised by the inference, selection and planning layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An observation carried no probability under every hypothesis that the
    /// current belief still allows.
    #[error("inference contradiction: {0}")]
    InferenceContradiction(String),
    #[error("belief cells do not refine the game partition (breakpoint {0} falls inside a cell)")]
    PartitionMismatch(f64),
    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(invalid(format!("alpha {alpha} outside [0, 1]")))
    }
}
