//! Multilevel block Toeplitz matrices generated by matrix-valued symbols,
//! their spectra, and preconditioned Krylov solves.

pub mod config;
pub mod dsl;
pub mod krylov;
pub mod error;
pub mod numerics;
pub mod symbol;
pub mod spectral;
pub mod toeplitz;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use config::Config;
pub use error::{Error, Result};
