use thiserror::Error;

/// Errors produced across the tomography pipeline.
#[derive(Debug, Error)]
pub enum QptError {
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e}): {context}")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
}

impl QptError {
    /// Short machine-readable kind, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            QptError::UnsupportedSize(_) => "unsupported_size",
            QptError::Shape(_) => "shape",
            QptError::Validation(_) => "validation",
            QptError::NonConvergence { .. } => "non_convergence",
            QptError::Consistency(_) => "consistency",
            QptError::NonFinite(_) => "non_finite",
            QptError::Empty(_) => "empty",
            QptError::Io { .. } => "io",
            QptError::Parse { .. } => "parse",
            QptError::Config { .. } => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, QptError>;
