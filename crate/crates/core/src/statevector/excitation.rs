//! Matrix-free excitation generators.
//!
//! A generator `ĝ = a†_{c₁} a†_{c₂} ⋯ a_{d₂} a_{d₁}` with disjoint creation and
//! annihilation sets couples each basis state `x` (all `d` occupied, all `c`
//! empty) to exactly one partner `x' = x ⊕ mask`, with `ĝ|x⟩ = s(x)|x'⟩`.
//! On each such pair `A = ĝ − ĝ†` acts as `[[0, −s], [s, 0]]`, so `A² = −1`
//! there and zero elsewhere, which makes `A³ = −A` and the expansion
//! `e^{θA} = 1 + sin θ A + (1 − cos θ) A²` exact.

use std::ops::Range;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use super::{widen, Real, StateVector};
use crate::par;
use crate::{alpha, beta, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExcitationKind {
    /// `a†_to a_from` on spin orbitals.
    Single { from: usize, to: usize },
    /// `a†_{to,α} a†_{to,β} a_{from,β} a_{from,α}` on spatial orbitals.
    PairDouble { from: usize, to: usize },
    /// `a†_{to[0]} a†_{to[1]} a_{from[1]} a_{from[0]}` on spin orbitals.
    Double { from: [usize; 2], to: [usize; 2] },
}

/// Compiled generator: creation/annihilation lists in application order plus
/// the masks used by the kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationGenerator {
    kind: ExcitationKind,
    /// Applied first to last: annihilators, then creators.
    ops: Vec<(usize, bool)>,
    occupied: usize,
    empty: usize,
    flip: usize,
    top: usize,
}

impl ExcitationGenerator {
    pub fn new(kind: ExcitationKind, n_qubits: usize) -> Result<Self> {
        let (create, annihilate): (Vec<usize>, Vec<usize>) = match kind {
            ExcitationKind::Single { from, to } => (vec![to], vec![from]),
            ExcitationKind::PairDouble { from, to } => {
                (vec![alpha(to), beta(to)], vec![alpha(from), beta(from)])
            }
            ExcitationKind::Double { from, to } => (to.to_vec(), from.to_vec()),
        };
        let all: Vec<usize> = create.iter().chain(&annihilate).copied().collect();
        if let Some(&bad) = all.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::Index(format!("spin orbital {bad} on {n_qubits} qubits")));
        }
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(Error::Index(format!("generator {kind:?} repeats an index")));
        }
        // ĝ = a†_{c1} a†_{c2} a_{d2} a_{d1}: rightmost factor acts first.
        let mut ops: Vec<(usize, bool)> = annihilate.iter().map(|&d| (d, false)).collect();
        ops.extend(create.iter().rev().map(|&c| (c, true)));
        let occupied = annihilate.iter().fold(0usize, |m, &q| m | 1 << q);
        let empty = create.iter().fold(0usize, |m, &q| m | 1 << q);
        let flip = occupied | empty;
        let top = usize::BITS as usize - 1 - flip.leading_zeros() as usize;
        Ok(Self { kind, ops, occupied, empty, flip, top })
    }

    pub fn kind(&self) -> ExcitationKind {
        self.kind
    }

    #[inline]
    fn is_source(&self, x: usize) -> bool {
        x & self.occupied == self.occupied && x & self.empty == 0
    }

    /// Jordan-Wigner sign of `ĝ|x⟩` for a source state `x`.
    #[inline]
    fn sign(&self, mut x: usize) -> bool {
        let mut negative = false;
        for &(q, _) in &self.ops {
            negative ^= (x & ((1 << q) - 1)).count_ones() & 1 == 1;
            x ^= 1 << q;
        }
        negative
    }

    /// Lower member of the `k`-th pair slot (bit `top` cleared).
    #[inline]
    fn slot_low(&self, k: usize) -> usize {
        let low = k & ((1 << self.top) - 1);
        ((k >> self.top) << (self.top + 1)) | low
    }

    /// Returns `(source, target, negative)` when slot `k` holds a coupled pair.
    #[inline]
    fn pair_at(&self, k: usize) -> Option<(usize, usize, bool)> {
        let lo = self.slot_low(k);
        let hi = lo ^ self.flip;
        let (src, dst) = if self.empty >> self.top & 1 == 1 { (lo, hi) } else { (hi, lo) };
        if self.is_source(src) {
            Some((src, dst, self.sign(src)))
        } else {
            None
        }
    }

    fn check<T: Real>(&self, state: &StateVector<T>) -> Result<()> {
        if self.top >= state.n_qubits() {
            return Err(Error::Index(format!(
                "generator touches qubit {} of a {}-qubit state",
                self.top,
                state.n_qubits()
            )));
        }
        Ok(())
    }

    /// `A|ψ⟩` with `A = ĝ − ĝ†`; not norm-preserving.
    pub fn apply_generator<T: Real>(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        self.check(state)?;
        let psi = state.amplitudes();
        let mut out = vec![Complex::<T>::default(); psi.len()];
        let half = self.flip & ((1 << self.top) - 1);
        let top = self.top;
        par::for_each_chunk_mut(&mut out, 1 << (top + 1), |ci, chunk| {
            let base = ci << (top + 1);
            let (lo_half, hi_half) = chunk.split_at_mut(1 << top);
            for j in 0..lo_half.len() {
                let lo = base + j;
                let hi = lo ^ self.flip;
                let (src, dst) = if self.empty >> top & 1 == 1 { (lo, hi) } else { (hi, lo) };
                if !self.is_source(src) {
                    continue;
                }
                let s = if self.sign(src) { -T::one() } else { T::one() };
                // A|src⟩ = s|dst⟩, A|dst⟩ = −s|src⟩
                let (v_src, v_dst) = (psi[dst] * (-s), psi[src] * s);
                if src == lo {
                    lo_half[j] = v_src;
                    hi_half[j ^ half] = v_dst;
                } else {
                    hi_half[j ^ half] = v_src;
                    lo_half[j] = v_dst;
                }
            }
        });
        StateVector::from_amplitudes(state.n_qubits(), out)
    }

    /// In-place `|ψ⟩ ← e^{θ(ĝ − ĝ†)}|ψ⟩`.
    pub fn apply_exponential<T: Real>(&self, state: &mut StateVector<T>, theta: f64) -> Result<()> {
        self.check(state)?;
        if theta == 0.0 {
            return Ok(());
        }
        // 1 + sin θ·A + (1 − cos θ)·A², with A² = −1 on the coupled pairs.
        let c1 = T::from_f64(theta.sin());
        let c2 = T::from_f64(1.0 - theta.cos());
        let top = self.top;
        let half = self.flip & ((1 << top) - 1);
        let src_is_low = self.empty >> top & 1 == 1;
        par::for_each_chunk_mut(state.amplitudes_mut(), 1 << (top + 1), |ci, chunk| {
            let base = ci << (top + 1);
            let (lo_half, hi_half) = chunk.split_at_mut(1 << top);
            for j in 0..lo_half.len() {
                let lo = base + j;
                let src = if src_is_low { lo } else { lo ^ self.flip };
                if !self.is_source(src) {
                    continue;
                }
                let s = if self.sign(src) { -T::one() } else { T::one() };
                let (a_src, a_dst) = if src_is_low {
                    (lo_half[j], hi_half[j ^ half])
                } else {
                    (hi_half[j ^ half], lo_half[j])
                };
                let new_src = a_src + a_dst * (-s * c1) - a_src * c2;
                let new_dst = a_dst + a_src * (s * c1) - a_dst * c2;
                if src_is_low {
                    lo_half[j] = new_src;
                    hi_half[j ^ half] = new_dst;
                } else {
                    hi_half[j ^ half] = new_src;
                    lo_half[j] = new_dst;
                }
            }
        });
        Ok(())
    }

    /// `⟨λ|A|ψ⟩`.
    pub fn matrix_element<T: Real>(&self, bra: &StateVector<T>, ket: &StateVector<T>) -> Result<Complex64> {
        self.check(ket)?;
        if bra.n_qubits() != ket.n_qubits() {
            return Err(Error::Dimension("bra and ket sizes differ".into()));
        }
        let (l, p) = (bra.amplitudes(), ket.amplitudes());
        let slots = ket.dim() / 2;
        Ok(par::sum_blocks(slots, |r: Range<usize>| {
            let mut acc = Complex64::default();
            for k in r {
                if let Some((src, dst, neg)) = self.pair_at(k) {
                    let term = widen(l[dst]).conj() * widen(p[src]) - widen(l[src]).conj() * widen(p[dst]);
                    if neg {
                        acc -= term;
                    } else {
                        acc += term;
                    }
                }
            }
            acc
        }))
    }
}
