//! Quantum thermometry with harmonic probes.
//!
//! Gaussian-state QFI, exact Caldeira-Leggett steady states over Ohmic reservoirs,
//! translationally invariant harmonic chains, the chain/star mappings, reservoir
//! discretization and free-mode heat capacities. Units: ħ = k_B = 1.

pub mod chain;
pub mod clm;
pub mod error;
pub mod fit;
pub mod gaussian;
pub mod mapping;
pub mod quad;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
