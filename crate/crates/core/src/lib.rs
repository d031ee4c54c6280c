//! Exact master equation and nonequilibrium Green functions for
//! Fano–Anderson open quantum systems: N levels linearly coupled to boson
//! or fermion reservoirs with arbitrary spectral densities.

pub mod cli;
pub mod correlations;
pub mod error;
pub mod greens;
pub mod linalg;
pub mod mastereq;
pub mod models;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use greens::{GreenFunctions, TimeGrid};
pub use linalg::CMatrix;
pub use spectral::{ReservoirSpec, SpectralDensity, Statistics, SystemSpec};
