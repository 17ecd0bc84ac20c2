use std::path::PathBuf;

use ecmkit::{DwError, EcmError, ModelError, SimError, SparseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Core(#[from] ecmkit::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 validation, 3 I/O, 4 internal invariant breach.
    pub fn exit_code(&self) -> u8 {
        use ecmkit::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Internal(_) => 4,
            CliError::Core(e) => match e {
                E::Io { .. } | E::Sparse(SparseError::Io { .. }) | E::Sim(SimError::Io(_)) => 3,
                _ => 2,
            },
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(ModelError, EcmError, SparseError, SimError, DwError);

pub type Result<T> = std::result::Result<T, CliError>;
