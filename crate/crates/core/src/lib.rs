//! Exact simulation of few-fermion interferometers.
//!
//! States are second-quantized: a sparse map from fermionic occupation
//! patterns (plus two-level detector ancillas) to complex amplitudes. Mode
//! unitaries act at the creation-operator level, absorbing detectors are
//! projective occupation measurements followed by annihilation, and
//! non-absorbing detectors entangle an ancilla with a mode and are read out
//! later. Two measurement pipelines (collapse at every click, or one terminal
//! Born-rule evaluation) produce joint outcome distributions that can be
//! compared directly.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dsl;
mod error;
pub mod experiment;
pub mod fock;
pub mod measurement;
pub mod optics;

pub use error::{Error, Result};
pub use fock::{AncillaId, BasisConfig, DensityOperator, FirstQuantized, FockSpace, ModeId, StateVector};
pub use num_complex::Complex64;

/// Amplitudes with magnitude below this are dropped from every state.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance used for unitarity and normalization checks.
pub const TOLERANCE: f64 = 1e-12;

/// Identifier of the sign and beam-splitter conventions baked into results.
pub const CONVENTION: &str = "jw-ascending;bs=[[1,1],[1,-1]]/sqrt2";
