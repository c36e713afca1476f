//! Point estimate methods for propagating Gaussian input uncertainty through
//! scalar response models.

pub mod benchmarks;
pub mod error;
pub mod estimator;
pub mod hpem;
pub mod io;
pub mod mce;
pub mod numeric;
pub mod propagate;
pub mod qpem;
pub mod randomfield;
pub mod report;
pub mod sampling;
pub mod sparsequad;
pub mod transform;
pub mod types;

pub use error::{Error, Result};
