use std::path::PathBuf;

use thiserror::Error;

use crate::dataio::ClassCode;

/// Errors produced by the detection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ill-conditioned {matrix}: {detail}")]
    IllConditioned { matrix: String, detail: String },

    #[error(
        "SMO did not converge after {iterations} iterations (KKT gap {gap:.3e} > tolerance {tolerance:.1e}, {n} training rows)"
    )]
    Convergence {
        iterations: usize,
        gap: f64,
        tolerance: f64,
        n: usize,
    },

    #[error("classifier {first}-vs-{second}: {source}")]
    PairTraining {
        first: ClassCode,
        second: ClassCode,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("{}{}: {msg}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for file-system, parse and configuration failures, as opposed to
    /// numerical or domain failures.
    pub fn is_io_or_config(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
