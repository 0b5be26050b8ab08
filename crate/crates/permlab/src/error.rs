use std::path::PathBuf;

use permlab_core::Error as CoreError;
use serde::Serialize;

/// Everything the command line can fail with. Each variant maps to a stable
/// machine-readable code and a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("{message}")]
    NoConvergence {
        message: String,
        report: serde_json::Value,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::NoConvergence { .. } => 3,
            _ => 2,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Io { .. } => "io",
            Self::Parse(_) => "parse",
            Self::NoConvergence { .. } => "no_convergence",
            Self::Core(e) => match e {
                CoreError::EmptySupport => "empty_support",
                CoreError::SizeGuard(_) => "size_guard",
                CoreError::SizeMismatch { .. } => "size_mismatch",
                CoreError::DimensionMismatch { .. } => "dimension_mismatch",
                CoreError::InvalidPeel(_) => "invalid_peel",
                CoreError::InvalidMatrix(_) => "invalid_matrix",
                CoreError::InvalidPermutation(_) => "invalid_permutation",
                CoreError::InvalidFlow(_) => "invalid_flow",
                CoreError::SupportViolation { .. } => "support_violation",
                CoreError::NonIntegral(_) => "non_integral",
                CoreError::InvalidArgument(_) => "invalid_argument",
            },
        }
    }

    /// `{"error": {"code": …, "message": …}}`, plus the partial report when
    /// a solver stopped early.
    pub fn envelope(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Body<'a> {
            code: &'a str,
            message: String,
        }
        let mut value = serde_json::json!({
            "error": Body { code: self.code(), message: self.to_string() }
        });
        if let Self::NoConvergence { report, .. } = self {
            value["report"] = report.clone();
        }
        value
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
