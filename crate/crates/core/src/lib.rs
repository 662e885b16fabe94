//! Quantum filtering for a two-level system driven by vacuum, single-photon
//! and coherent-superposition (cat) field inputs.
//!
//! The crate integrates the conditioned stochastic master equations under
//! homodyne and photon-counting detection, the unconditioned master equations,
//! and the purity dynamics of both, and compares ensemble averages against the
//! master equation.

pub mod algebra;
pub mod config;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod filter;
pub mod output;
pub mod purity;
pub mod scenarios;
pub mod validate;

pub use error::{Error, Result};
