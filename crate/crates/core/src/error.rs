use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("best-response system is singular (determinant {determinant})")]
    Singular { determinant: f64 },

    #[error("non-finite {quantity} at step {step}")]
    NonFinite { step: usize, quantity: &'static str },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("sample `{name}` needs at least {required} observations, got {got}")]
    SampleTooSmall {
        name: &'static str,
        required: usize,
        got: usize,
    },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
