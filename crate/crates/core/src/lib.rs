//! Topologically quantized piezoelectric polarization for periodically
//! deformed two-band lattice models.

pub mod disorder;
pub mod error;
pub mod linalg;
pub mod loops;
pub mod model;
pub mod polarization;
pub mod spectral;
pub mod symmetry;
pub mod topology;

pub use error::{Error, Result};
