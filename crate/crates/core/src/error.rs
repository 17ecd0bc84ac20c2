//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Failures while loading or validating a machine or kernel description.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Invariant { field: String, reason: String },
    #[error("unknown instruction class `{name}` (known: {known})")]
    UnknownInstruction { name: String, known: String },
    #[error("unknown built-in `{name}` (known: {known})")]
    UnknownBuiltin { name: String, known: String },
}

impl ModelError {
    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invariant {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Failures of the ECM engine proper.
#[derive(Debug, Error)]
pub enum EcmError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("kernel `{kernel}` has no data volume for the {boundary} boundary")]
    MissingVolume { kernel: String, boundary: String },
    #[error("zero bandwidth at level {level}")]
    ZeroBandwidth { level: String },
    #[error("saturation analysis needs a non-zero memory volume")]
    ZeroMemoryVolume,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

/// Sparse-matrix construction, I/O and SpMV errors.
#[derive(Debug, Error)]
pub enum SparseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operation requires a square matrix, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("bad binary SELL file: {0}")]
    Format(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Cache simulator errors.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("access at {address:#x} + {size} overflows the address space")]
    AddressOverflow { address: u64, size: u32 },
    #[error("event refers to core {core} but only {cores} cores are configured")]
    CoreOutOfRange { core: u32, cores: usize },
    #[error("partition fractions for {level} sum to {sum} > 1")]
    PartitionOverflow { level: String, sum: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad trace file: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Domain-wall operator and lattice errors.
#[derive(Debug, Error)]
pub enum DwError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("field does not conform to geometry: {0}")]
    Mismatch(String),
    #[error("explicit operator would have {dims} dimensions (limit {limit})")]
    TooLarge { dims: usize, limit: usize },
}

/// Umbrella error for callers that mix several subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ecm(#[from] EcmError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dw(#[from] DwError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
