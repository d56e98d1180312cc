//! Dense complex linear algebra sized for registers of up to six spins.

mod eigen;
mod matrix;

pub(crate) use eigen::propagator_from_spectrum;
pub use eigen::{
    degeneracy_classes, expm_minus_i_h_t, hermitian_eig, SpectralDecomposition, CONVERGENCE,
    DEGENERACY_TOL, MAX_SWEEPS,
};
pub use matrix::{
    kron, ComplexMatrix, HermitianOperator, StateVector, UnitaryOperator, C64, I, ONE, ZERO,
};
