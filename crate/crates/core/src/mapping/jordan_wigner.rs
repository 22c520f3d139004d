use num_complex::Complex64;

use super::pauli::{PauliLetters, PauliSum};
use crate::integrals::ActiveSpaceIntegrals;
use crate::{alpha, beta, Error, Result};

const HALF: Complex64 = Complex64::new(0.5, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

fn check_index(j: usize, n_qubits: usize) -> Result<()> {
    if j >= n_qubits || n_qubits > 64 {
        return Err(Error::Index(format!("spin orbital {j} on {n_qubits} qubits")));
    }
    Ok(())
}

/// `a_j ↦ Z_0 ⋯ Z_{j-1} ½(X_j + iY_j)`.
pub fn jw_lowering(j: usize, n_qubits: usize) -> Result<PauliSum> {
    check_index(j, n_qubits)?;
    let chain = PauliLetters::parity_below(j);
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(HALF, PauliLetters { x: 1 << j, z: chain.z });
    s.add_term(HALF_I, PauliLetters { x: 1 << j, z: chain.z | 1 << j });
    Ok(s)
}

/// `a†_j ↦ Z_0 ⋯ Z_{j-1} ½(X_j − iY_j)`.
pub fn jw_raising(j: usize, n_qubits: usize) -> Result<PauliSum> {
    Ok(jw_lowering(j, n_qubits)?.adjoint())
}

/// Qubit form of `a†_i a_j`, built from the closed-form products rather than
/// a generic multiplication.
pub fn excitation_sum(i: usize, j: usize, n_qubits: usize) -> Result<PauliSum> {
    let raise = jw_raising(i, n_qubits)?;
    let lower = jw_lowering(j, n_qubits)?;
    Ok((&raise * &lower).pruned())
}

/// Qubit Hamiltonian of the active space in the alternating α/β layout.
pub fn build_qubit_hamiltonian(ints: &ActiveSpaceIntegrals) -> PauliSum {
    let m = ints.n_orb;
    let n = 2 * m;
    let mut ham = PauliSum::identity(n, ints.core_energy);
    // E[i][j] = a†_i a_j on spin orbitals.
    let e: Vec<Vec<PauliSum>> = (0..n)
        .map(|i| (0..n).map(|j| excitation_sum(i, j, n).expect("index in range")).collect())
        .collect();
    let spin = |p: usize, s: usize| if s == 0 { alpha(p) } else { beta(p) };

    for p in 0..m {
        for q in 0..m {
            let h = ints.h[(p, q)];
            if h == 0.0 {
                continue;
            }
            for s in 0..2 {
                ham.add_scaled(&e[spin(p, s)][spin(q, s)], Complex64::new(h, 0.0));
            }
        }
    }
    // a†_P a†_R a_S a_Q = E_PQ E_RS − δ_QR E_PS
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let g = ints.g(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    let w = Complex64::new(0.5 * g, 0.0);
                    for sig in 0..2 {
                        for tau in 0..2 {
                            let (pp, qq) = (spin(p, sig), spin(q, sig));
                            let (rr, ss) = (spin(r, tau), spin(s, tau));
                            let prod = &e[pp][qq] * &e[rr][ss];
                            ham.add_scaled(&prod, w);
                            if qq == rr {
                                ham.add_scaled(&e[pp][ss], -w);
                            }
                        }
                    }
                }
            }
        }
    }
    ham.pruned()
}

/// `S²`, `S_z` and `N` as qubit operators.
#[derive(Clone, Debug)]
pub struct SpinObservables {
    pub s2: PauliSum,
    pub sz: PauliSum,
    pub n: PauliSum,
}

/// Builds `S² = S⁻S⁺ + S_z(S_z + 1)`, `S_z` and `N` for `n_orb` spatial orbitals.
pub fn build_spin_observables(n_orb: usize) -> SpinObservables {
    let n = 2 * n_orb;
    let num = |j: usize| excitation_sum(j, j, n).expect("index in range");
    let mut sz = PauliSum::zero(n);
    let mut count = PauliSum::zero(n);
    let mut s_plus = PauliSum::zero(n);
    let mut s_minus = PauliSum::zero(n);
    for p in 0..n_orb {
        let (na, nb) = (num(alpha(p)), num(beta(p)));
        sz.add_scaled(&na, HALF);
        sz.add_scaled(&nb, -HALF);
        count.add_scaled(&na, Complex64::new(1.0, 0.0));
        count.add_scaled(&nb, Complex64::new(1.0, 0.0));
        s_plus.add_scaled(&excitation_sum(alpha(p), beta(p), n).expect("in range"), Complex64::new(1.0, 0.0));
        s_minus.add_scaled(&excitation_sum(beta(p), alpha(p), n).expect("in range"), Complex64::new(1.0, 0.0));
    }
    let sz = sz.pruned();
    let s2 = (&(&s_minus * &s_plus) + &(&(&sz * &sz) + &sz)).pruned();
    SpinObservables { s2, sz, n: count.pruned() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_energy(h: &PauliSum, b: usize) -> Complex64 {
        let d = h.to_dense();
        d[(b, b)]
    }

    #[test]
    fn lowering_examples() {
        let a0 = jw_lowering(0, 1).unwrap();
        assert_eq!(a0.coeff(PauliLetters::x(0)), HALF);
        assert_eq!(a0.coeff(PauliLetters::y(0)), HALF_I);
        let a1 = jw_lowering(1, 2).unwrap();
        assert_eq!(a1.coeff(PauliLetters { x: 0b10, z: 0b01 }), HALF);
        assert_eq!(a1.coeff(PauliLetters { x: 0b10, z: 0b11 }), HALF_I);
        assert!(jw_lowering(2, 2).is_err());
        let r = jw_raising(0, 1).unwrap();
        assert_eq!(r.coeff(PauliLetters::y(0)), -HALF_I);
    }

    #[test]
    fn canonical_anticommutation() {
        for n in 1..=6 {
            for j in 0..n {
                for k in 0..n {
                    let aj = jw_lowering(j, n).unwrap();
                    let ak = jw_lowering(k, n).unwrap();
                    let akd = jw_raising(k, n).unwrap();
                    let ac = aj.anticommutator(&akd);
                    if j == k {
                        assert_eq!(ac, PauliSum::identity(n, 1.0));
                    } else {
                        assert!(ac.is_empty(), "{{a_{j}, a†_{k}}} = {ac}");
                    }
                    assert!(aj.anticommutator(&ak).is_empty());
                }
            }
        }
    }

    #[test]
    fn one_orbital_hamiltonian_is_diagonal() {
        let mut ints = ActiveSpaceIntegrals::zeros(1, 1, 1);
        ints.h[(0, 0)] = -1.0;
        ints.g[0] = 0.5;
        let h = build_qubit_hamiltonian(&ints);
        let d = h.to_dense();
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(d[(r, c)].norm() < 1e-15);
                }
            }
        }
        assert!(basis_energy(&h, 0b00).norm() < 1e-15);
        assert!((basis_energy(&h, 0b01).re + 1.0).abs() < 1e-15);
        assert!((basis_energy(&h, 0b10).re + 1.0).abs() < 1e-15);
        assert!((basis_energy(&h, 0b11).re + 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_integrals_give_scaled_identity() {
        let mut ints = ActiveSpaceIntegrals::zeros(3, 2, 1);
        ints.core_energy = 2.5;
        assert_eq!(build_qubit_hamiltonian(&ints), PauliSum::identity(6, 2.5));
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_number() {
        let ints = ActiveSpaceIntegrals::random(3, 2, 1, 4);
        let h = build_qubit_hamiltonian(&ints);
        assert!(h.max_imag() <= 1e-12);
        let obs = build_spin_observables(3);
        assert!(h.commutator(&obs.n).is_empty());
        assert!(h.commutator(&obs.sz).is_empty());
        assert!(h.commutator(&obs.s2).is_empty());
    }

    #[test]
    fn spin_operators_commute() {
        let obs = build_spin_observables(3);
        assert!(obs.s2.commutator(&obs.sz).is_empty());
        assert!(obs.s2.commutator(&obs.n).is_empty());
        for op in [&obs.s2, &obs.sz, &obs.n] {
            assert!(op.is_hermitian(0.0));
        }
    }
}
