use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid {column}: {reason}")]
    Field { column: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("scaler used before fit")]
    NotFitted,
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("training diverged at epoch {epoch} (parameter L2 norm {param_norm})")]
    Diverged { epoch: usize, param_norm: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
