use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal max {off_diagonal:e})")]
    Convergence { sweeps: usize, off_diagonal: f64 },

    #[error("leverage of sample {index} is {leverage} (>= 1 - 1e-10); leave-one-out residual undefined")]
    DegenerateLeverage { index: usize, leverage: f64 },

    #[error("training failed: {0}")]
    Training(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: unsupported format version {found} (this build reads up to {supported})")]
    Version {
        path: PathBuf,
        found: u32,
        supported: u32,
    },
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
