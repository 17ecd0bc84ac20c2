//! Performance modeling for streaming, stencil and sparse kernels: machine
//! descriptions, the ECM model, layer conditions, SpMV storage formats and
//! a multi-core cache simulator to check traffic predictions against.

pub mod cache_sim;
pub mod ecm;
pub mod error;
pub mod kernels;
pub mod lc_dw;
pub mod machine;
pub mod sparse;
pub mod spmv;

pub use ecm::{predict, predict_with, EcmPrediction, KernelProfile, Overlap, Residency, Unit, Volume};
pub use error::{DwError, EcmError, Error, ModelError, SimError, SparseError};
pub use machine::MachineModel;
