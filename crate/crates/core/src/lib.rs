//! Exact diagonalization and gate synthesis for exchange-only encoded qubits.
//!
//! Each logical qubit lives in the S = 1/2, S_z = +1/2 doublet of three
//! spin-½ sites with always-on, equal Heisenberg couplings in a uniform
//! magnetic field. Energies are in units of the idle exchange J (ħ = 1), so
//! times are in units of 1/J.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoding;
pub mod error;
pub mod gates;
pub mod lambda;
pub mod linalg;
pub mod spectra;
pub mod spin;

pub use error::{Error, Result};
