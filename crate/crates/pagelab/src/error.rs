//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PagelabError {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("iterative solver did not converge: {msg} (residual {residual:.3e})")]
    Convergence { msg: String, residual: f64 },

    #[error("degenerate spectrum: {msg} (gap {gap:.3e})")]
    Degeneracy { msg: String, gap: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("dissipative step too large: gamma*dt = {0} > 1")]
    StepTooLarge(f64),

    #[error("positivity violated: min eigenvalue {0:.3e}; reduce the Trotter step")]
    PositivityViolation(f64),

    #[error("series maximum at an endpoint; run longer")]
    MaximumAtEndpoint,

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("run interrupted after {0} samples")]
    Interrupted(usize),
}

pub type Result<T> = std::result::Result<T, PagelabError>;

impl PagelabError {
    /// Process exit code for the CLI: 2 config, 3 numerical, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            PagelabError::Config(_)
            | PagelabError::InvalidSize(_)
            | PagelabError::DimensionMismatch(_)
            | PagelabError::IndexOutOfRange { .. }
            | PagelabError::Json(_) => 2,
            PagelabError::Convergence { .. } | PagelabError::MaximumAtEndpoint => 4,
            _ => 3,
        }
    }
}
