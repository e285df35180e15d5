//! Numerical laboratory for the deformed Gaussian unitary ensemble.

pub mod config;
pub mod ensembles;
pub mod fredholm;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod paths;
pub mod quadrature;
pub mod rng;
pub mod spacing;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use hermitian::HermitianMatrix;
pub use rng::RngSeed;
pub use spectral::Spectrum;
