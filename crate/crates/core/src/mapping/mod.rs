//! Pauli-string algebra and the Jordan-Wigner mapping.

mod jordan_wigner;
mod pauli;

pub use jordan_wigner::{
    build_qubit_hamiltonian, build_spin_observables, excitation_sum, jw_lowering, jw_raising,
    SpinObservables,
};
pub use pauli::{PauliLetters, PauliString, PauliSum, PRUNE_THRESHOLD};
