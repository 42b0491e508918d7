use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GhError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("coefficient map is identically zero")]
    ZeroMap,
    #[error("non-real coefficient: {0}")]
    NonReal(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl GhError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            GhError::Spec(_) | GhError::Dimension(_) | GhError::ZeroMap | GhError::NonReal(_) => 2,
            GhError::InsufficientData(_) | GhError::PrecisionExhausted(_) | GhError::Numeric(_) => {
                3
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, GhError>;
