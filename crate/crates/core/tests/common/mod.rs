#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use spinstate::ansatz::{build_reference_t0, compile_ansatz, AnsatzProgram, AnsatzSpec};
use spinstate::integrals::{parse_fcidump, ActiveSpaceIntegrals};
use spinstate::mapping::{build_qubit_hamiltonian, jw_lowering, jw_raising, PauliSum};
use spinstate::statevector::{ExcitationKind, StateVector};
use spinstate::vqe::{SaVqeProblem, ScheduleParams, TargetState, VqeOptions};

/// Minimal-basis H₂ near equilibrium, two electrons in two orbitals.
pub const H2_FCIDUMP: &str = "\
 &FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
 &END
  0.6757101548  1  1  1  1
  0.1809270136  1  2  1  2
  0.6645817691  1  1  2  2
  0.6985121625  2  2  2  2
 -1.2563390730  1  1  0  0
 -0.4718960244  2  2  0  0
  0.7137539936  0  0  0  0
";

pub fn h2() -> ActiveSpaceIntegrals {
    parse_fcidump(H2_FCIDUMP).expect("valid FCIDUMP")
}

/// Dense `ĝ − ĝ†` built from Jordan-Wigner ladder operators, independent of
/// the matrix-free kernels.
pub fn dense_generator(kind: ExcitationKind, n: usize) -> DMatrix<Complex64> {
    let (create, annihilate): (Vec<usize>, Vec<usize>) = match kind {
        ExcitationKind::Single { from, to } => (vec![to], vec![from]),
        ExcitationKind::PairDouble { from, to } => (vec![2 * to, 2 * to + 1], vec![2 * from, 2 * from + 1]),
        ExcitationKind::Double { from, to } => (to.to_vec(), from.to_vec()),
    };
    let mut g = PauliSum::identity(n, 1.0);
    for &c in &create {
        g = &g * &jw_raising(c, n).unwrap();
    }
    for &d in annihilate.iter().rev() {
        g = &g * &jw_lowering(d, n).unwrap();
    }
    (&g - &g.adjoint()).pruned().to_dense()
}

pub fn column(s: &StateVector<f64>) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(s.dim(), s.amplitudes().iter().copied())
}

/// T0 references for `spins`, equally weighted.
pub fn targets(n_orb: usize, n_electrons: usize, spins: &[usize]) -> Vec<TargetState> {
    let w = 1.0 / spins.len() as f64;
    spins
        .iter()
        .map(|&s| TargetState { reference: build_reference_t0(n_orb, n_electrons, s).unwrap(), weight: w })
        .collect()
}

pub fn program(spec: &AnsatzSpec, ints: &ActiveSpaceIntegrals) -> AnsatzProgram {
    compile_ansatz(spec, ints.n_orb, ints.n_alpha, ints.n_beta).unwrap()
}

pub fn problem(ints: &ActiveSpaceIntegrals, spec: &AnsatzSpec, spins: &[usize]) -> SaVqeProblem {
    SaVqeProblem::new(
        build_qubit_hamiltonian(ints),
        targets(ints.n_orb, ints.n_electrons(), spins),
        program(spec, ints),
    )
}

/// A compressed schedule for short test runs: larger steps at first, then a
/// decay that lets ADAM settle well below chemical accuracy.
pub fn quick_options() -> VqeOptions {
    VqeOptions {
        schedule: ScheduleParams { initial: 3e-2, end: 1e-4, boundary: 300, transition: 700, power: 2.0 },
        ..VqeOptions::default()
    }
}
