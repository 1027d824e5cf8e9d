//! High-impedance fault simulation and data-driven detection.
//!
//! [`hifsim`] produces labeled per-cycle RMS datasets from an arc model on a
//! 13-bus radial feeder surrogate. [`pca`], [`fda`] and [`svm`] train and run
//! detectors on those datasets, and [`eval`] scores their decisions.

pub mod dataio;
mod error;
pub mod eval;
pub mod fda;
pub mod hifsim;
pub mod numerics;
pub mod pca;
pub mod pipeline;
pub mod svm;

pub use error::{Error, Result};
