use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    Solve { iterations: usize, residual: f64 },

    #[error("equilibrium density is negative ({value:e}) at x = {x}; check convexity and endpoints")]
    DensityNegative { x: f64, value: f64 },

    #[error("fixed-point iteration did not converge in {} iterations (last residual {:e})", .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    FixedPoint { history: Vec<f64> },

    #[error("Markov chain is not mixing: acceptance rate {acceptance} after adaptation")]
    Mixing { acceptance: f64 },

    #[error("no spacings available in the selected interval")]
    NoSpacings,

    #[error("requested computation is too expensive: {0}")]
    Complexity(String),

    #[error("loss of precision: {0}")]
    Precision(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{}:{line}: {message}", .path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
