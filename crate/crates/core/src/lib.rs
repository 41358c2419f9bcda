//! Dual-polarized beyond-diagonal RIS: cascaded channel sampling, lossless
//! reciprocal scattering synthesis, closed-form scaling laws, Monte Carlo
//! verification and an exhaustive architecture oracle.

pub mod channel;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod scattering;

pub use error::{Error, Result};
