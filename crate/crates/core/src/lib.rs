//! Decoherence of a persistent supercurrent in a superconducting ring by its
//! electromagnetic environment.

pub mod cli;
pub mod cylinder;
pub mod decoherence;
pub mod dissipation;
pub mod error;
pub mod physical;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
