use std::ops::Range;

use num_complex::{Complex, Complex64};

use super::{check_residue, group_by_flip, narrow, widen, Real, StateVector};
use crate::mapping::PauliSum;
use crate::par;
use crate::{Error, Result};

/// Entries below this magnitude are not stored.
const DROP: f64 = 1e-14;

/// Compressed-row form of a Pauli sum, for repeated application to states.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real = f64> {
    n_qubits: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn from_pauli_sum(sum: &PauliSum) -> Self {
        let n = sum.n_qubits();
        let dim = 1usize << n;
        let groups = group_by_flip(sum);
        let blocks = par::map_blocks(dim, |rows: Range<usize>| {
            let mut lens = Vec::with_capacity(rows.len());
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            for r in rows {
                let before = cols.len();
                for (x, terms) in &groups {
                    let c = r ^ *x as usize;
                    let mut v = Complex64::default();
                    for &(z, coef) in terms {
                        if (z & c as u64).count_ones() & 1 == 1 {
                            v -= coef;
                        } else {
                            v += coef;
                        }
                    }
                    if v.norm() > DROP {
                        cols.push(c as u32);
                        vals.push(narrow::<T>(v));
                    }
                }
                lens.push(cols.len() - before);
            }
            (lens, cols, vals)
        });
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (lens, c, v) in blocks {
            for l in lens {
                row_ptr.push(row_ptr.last().unwrap() + l);
            }
            cols.extend(c);
            vals.extend(v);
        }
        Self { n_qubits: n, row_ptr, cols, vals }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::Dimension(format!("operator on {} qubits, state on {n}", self.n_qubits)));
        }
        Ok(())
    }

    #[inline]
    fn row_dot(&self, r: usize, psi: &[Complex<T>]) -> Complex64 {
        let mut acc = Complex64::default();
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += widen(self.vals[k]) * widen(psi[self.cols[k] as usize]);
        }
        acc
    }

    /// `O|ψ⟩`, unnormalized.
    pub fn apply(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        self.check(state.n_qubits())?;
        let psi = state.amplitudes();
        let mut out = vec![Complex::<T>::default(); psi.len()];
        par::fill_indexed(&mut out, |r| narrow::<T>(self.row_dot(r, psi)));
        StateVector::from_amplitudes(self.n_qubits, out)
    }

    /// `⟨ψ|O|ψ⟩` for a hermitian operator.
    pub fn expectation(&self, state: &StateVector<T>) -> Result<f64> {
        self.check(state.n_qubits())?;
        let psi = state.amplitudes();
        let value: Complex64 = par::sum_blocks(psi.len(), |rows: Range<usize>| {
            rows.map(|r| widen(psi[r]).conj() * self.row_dot(r, psi)).sum::<Complex64>()
        });
        check_residue::<T>(value)
    }

    /// Entry `⟨row|O|col⟩`, zero when not stored.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        (self.row_ptr[row]..self.row_ptr[row + 1])
            .find(|&k| self.cols[k] as usize == col)
            .map(|k| widen(self.vals[k]))
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::ActiveSpaceIntegrals;
    use crate::mapping::{build_qubit_hamiltonian, PauliLetters};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sum(n: usize, terms: usize, seed: u64) -> PauliSum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = PauliSum::zero(n);
        let mask = (1u64 << n) - 1;
        for _ in 0..terms {
            let l = PauliLetters { x: rng.gen::<u64>() & mask, z: rng.gen::<u64>() & mask };
            s.add_term(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), l);
        }
        s
    }

    #[test]
    fn matches_dense_and_matrix_free() {
        let sum = random_sum(6, 40, 1);
        let dense = sum.to_dense();
        let op = SparseOperator::<f64>::from_pauli_sum(&sum);
        let psi = StateVector::<f64>::random(6, 2);
        let v = nalgebra::DVector::from_iterator(64, psi.amplitudes().iter().copied());
        let expect = &dense * &v;
        let got = op.apply(&psi).unwrap();
        let free = psi.apply_pauli_sum(&sum).unwrap();
        for i in 0..64 {
            assert!((got.amplitude(i) - expect[i]).norm() <= 1e-12);
            assert!((free.amplitude(i) - expect[i]).norm() <= 1e-12);
            for j in 0..64 {
                assert!((op.get(i, j) - dense[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn expectation_agrees() {
        let ints = ActiveSpaceIntegrals::random(3, 2, 1, 3);
        let h = build_qubit_hamiltonian(&ints);
        let op = SparseOperator::<f64>::from_pauli_sum(&h);
        for seed in 0..5 {
            let psi = StateVector::<f64>::random(6, seed);
            let a = op.expectation(&psi).unwrap();
            let b = psi.expectation(&h).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(op.expectation(&StateVector::<f64>::basis(4, 0).unwrap()).is_err());
    }
}
