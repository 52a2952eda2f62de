//! Verification and transformation of passive linear time-invariant systems
//! given by state-space realization arrays.

pub mod cones;
pub mod convexity;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod qmi;
pub mod realization;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{CMat, Complex64};
pub use realization::{Realization, TransferSample};
