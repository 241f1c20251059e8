use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonant denominator for forcing mode {index}: |{denominator:e}| below {tolerance:e}")]
    Resonant {
        index: usize,
        denominator: f64,
        tolerance: f64,
    },

    #[error("non-finite state produced at step {step}")]
    NonFinite { step: u64 },

    #[error("model `{0}` exposes no Hamiltonian splitting")]
    MissingSplitting(String),

    #[error("need at least {needed} checkpoints, have {have}")]
    InsufficientCheckpoints { needed: usize, have: usize },

    #[error("accumulator is not converging (trajectory escaped)")]
    NotConverging,

    #[error("fields do not share one scan domain: {0}")]
    DomainMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that stem from user input rather than numerics or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Resonant { .. }
                | Error::MissingSplitting(_)
                | Error::DomainMismatch(_)
                | Error::Config(_)
        )
    }
}
