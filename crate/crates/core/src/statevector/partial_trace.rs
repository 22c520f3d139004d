use std::ops::{Add, Range};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{deposit_bits, widen, Real, StateVector};
use crate::par;
use crate::{alpha, beta, Error, Result};

/// Accumulator for up to a 16×16 density matrix.
#[derive(Clone)]
struct Acc(Vec<Complex64>);

impl Default for Acc {
    fn default() -> Self {
        Acc(vec![Complex64::default(); 256])
    }
}

impl Add for Acc {
    type Output = Acc;

    fn add(mut self, rhs: Acc) -> Acc {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

/// Reduced density matrix of one or two spatial orbitals.
///
/// Local basis per orbital is `{|vac⟩, |α⟩, |β⟩, |αβ⟩}` (index bit 0 = α,
/// bit 1 = β); for two orbitals `[i, j]` the combined index is
/// `local_i + 4·local_j`. Before tracing out the rest, each basis state is
/// reordered so the target spin orbitals come first in the listed order, and
/// its amplitude picks up the sign of that fermionic permutation.
pub fn reduced_density<T: Real>(state: &StateVector<T>, orbitals: &[usize]) -> Result<DMatrix<Complex64>> {
    let n = state.n_qubits();
    let m = n / 2;
    if orbitals.is_empty() || orbitals.len() > 2 {
        return Err(Error::Index("reduced density takes one or two orbitals".into()));
    }
    if let Some(&bad) = orbitals.iter().find(|&&o| o >= m) {
        return Err(Error::Index(format!("orbital {bad} of {m}")));
    }
    if orbitals.len() == 2 && orbitals[0] == orbitals[1] {
        return Err(Error::Index(format!("orbital {} repeated", orbitals[0])));
    }
    let targets: Vec<usize> = orbitals.iter().flat_map(|&o| [alpha(o), beta(o)]).collect();
    let target_mask = targets.iter().fold(0usize, |acc, &q| acc | 1 << q);
    let rest_mask = ((1usize << n) - 1) & !target_mask;
    let n_rest = n - targets.len();
    let local_dim = 1usize << targets.len();

    // Pairs of target modes whose relative order is reversed by the reordering.
    let mut crossed: Vec<(usize, usize)> = Vec::new();
    for a in 0..targets.len() {
        for b in a + 1..targets.len() {
            if targets[a] > targets[b] {
                crossed.push((targets[a], targets[b]));
            }
        }
    }
    let negative = |x: usize| -> bool {
        let mut count = 0u32;
        for &t in &targets {
            if x >> t & 1 == 1 {
                count += (x & rest_mask & ((1 << t) - 1)).count_ones();
            }
        }
        for &(a, b) in &crossed {
            if x >> a & 1 == 1 && x >> b & 1 == 1 {
                count += 1;
            }
        }
        count & 1 == 1
    };
    let locals: Vec<usize> = (0..local_dim)
        .map(|a| targets.iter().enumerate().fold(0, |acc, (k, &q)| if a >> k & 1 == 1 { acc | 1 << q } else { acc }))
        .collect();

    let psi = state.amplitudes();
    let acc = par::sum_blocks(1usize << n_rest, |r: Range<usize>| {
        let mut acc = Acc::default();
        let mut v = [Complex64::default(); 16];
        for k in r {
            let rest = deposit_bits(k, rest_mask);
            let mut any = false;
            for (a, &loc) in locals.iter().enumerate() {
                let x = rest | loc;
                let amp = widen(psi[x]);
                v[a] = if negative(x) { -amp } else { amp };
                any |= amp != Complex64::default();
            }
            if !any {
                continue;
            }
            for a in 0..local_dim {
                if v[a] == Complex64::default() {
                    continue;
                }
                for b in 0..local_dim {
                    acc.0[a * 16 + b] += v[a] * v[b].conj();
                }
            }
        }
        acc
    });
    Ok(DMatrix::from_fn(local_dim, local_dim, |a, b| acc.0[a * 16 + b]))
}
