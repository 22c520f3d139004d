//! State-averaged, orbital-optimized variational quantum eigensolver on a
//! dense statevector.
//!
//! The crate is organised bottom-up:
//!
//! - [`integrals`]: FCIDUMP ingestion, active-space integrals, orbital rotations.
//! - [`mapping`]: Pauli-string algebra and the Jordan-Wigner transformation.
//! - [`statevector`]: the 2^n amplitude engine and its matrix-free kernels.
//! - [`ansatz`]: reference states and UCC-family generator programs.
//! - [`vqe`]: state-averaged energy, adjoint gradients, ADAM driver.
//! - [`scf`]: reduced density matrices and the orbital-optimization loop.
//! - [`diagnostics`]: orbital entropies, `Z_s(1)`, mutual information.
//! - [`oracle`]: exact diagonalization within (N, S_z) sectors.
//!
//! Spin orbitals use the alternating convention throughout: qubit `2p` holds
//! spatial orbital `p` with spin α, qubit `2p + 1` the β partner.

pub mod ansatz;
pub mod diagnostics;
mod error;
pub mod integrals;
pub mod linalg;
pub mod mapping;
pub mod oracle;
pub mod par;
pub mod scf;
pub mod statevector;
pub mod vqe;

pub use error::{Error, Result};

/// Hartree to kcal/mol.
pub const HARTREE_TO_KCAL_PER_MOL: f64 = 627.5094740631;

/// Qubit index of the α spin orbital of spatial orbital `p`.
#[inline]
pub const fn alpha(p: usize) -> usize {
    2 * p
}

/// Qubit index of the β spin orbital of spatial orbital `p`.
#[inline]
pub const fn beta(p: usize) -> usize {
    2 * p + 1
}
