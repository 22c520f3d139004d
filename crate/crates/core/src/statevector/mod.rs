//! Dense statevector engine.
//!
//! Basis index bit `q` is the occupation of qubit (spin orbital) `q`.
//! Amplitudes are stored as `Complex<T>` for `T` in {`f32`, `f64`}; every
//! reduction accumulates in `f64`.

mod excitation;
mod partial_trace;
mod snapshot;
mod sparse;

use std::fmt::Debug;
use std::ops::Range;

use num_complex::{Complex, Complex64};
use num_traits::{Float, FloatConst};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mapping::PauliSum;
#[cfg(test)]
use crate::mapping::PauliLetters;
use crate::par;
use crate::{Error, Result};

pub use excitation::{ExcitationGenerator, ExcitationKind};
pub use partial_trace::reduced_density;
pub use snapshot::{read_snapshot, write_snapshot, AnyState};
pub use sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Floating-point type of the amplitudes.
pub trait Real: Float + FloatConst + Default + Debug + Send + Sync + 'static {
    const PRECISION: Precision;
    /// Tolerance for imaginary residues of hermitian expectations.
    const RESIDUE_TOL: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    const PRECISION: Precision = Precision::F64;
    const RESIDUE_TOL: f64 = 1e-10;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::F32;
    const RESIDUE_TOL: f64 = 1e-4;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

#[inline]
pub(crate) fn widen<T: Real>(c: Complex<T>) -> Complex64 {
    Complex64::new(c.re.to_f64(), c.im.to_f64())
}

#[inline]
pub(crate) fn narrow<T: Real>(c: Complex64) -> Complex<T> {
    Complex::new(T::from_f64(c.re), T::from_f64(c.im))
}

/// Parses an occupation string such as `"1110101010"`, leftmost character
/// being qubit 0.
pub fn index_from_occupation(occ: &str) -> Result<usize> {
    let mut idx = 0usize;
    for (q, c) in occ.chars().enumerate() {
        match c {
            '1' => idx |= 1 << q,
            '0' => {}
            _ => return Err(Error::Index(format!("invalid occupation character {c:?}"))),
        }
    }
    Ok(idx)
}

/// Inverse of [`index_from_occupation`].
pub fn occupation_string(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect()
}

/// Scatters the low bits of `k` into the set bits of `mask` (software pdep).
#[inline]
pub(crate) fn deposit_bits(mut k: usize, mut mask: usize) -> usize {
    let mut out = 0;
    while mask != 0 {
        let bit = mask & mask.wrapping_neg();
        if k & 1 == 1 {
            out |= bit;
        }
        k >>= 1;
        mask &= mask - 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real = f64> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits >= usize::BITS as usize || index >> n_qubits != 0 {
            return Err(Error::Index(format!("basis state {index} on {n_qubits} qubits")));
        }
        let mut amps = vec![Complex::default(); 1 << n_qubits];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amps })
    }

    /// Normalized superposition of basis kets.
    pub fn from_kets(n_qubits: usize, kets: &[(usize, Complex64)]) -> Result<Self> {
        let mut out = Self::basis(n_qubits, 0)?;
        out.amps[0] = Complex::default();
        for &(idx, c) in kets {
            if idx >> n_qubits != 0 {
                return Err(Error::Index(format!("basis state {idx} on {n_qubits} qubits")));
            }
            out.amps[idx] = out.amps[idx] + narrow::<T>(c);
        }
        out.normalize()?;
        Ok(out)
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Haar-like random state from normalized complex Gaussians.
    pub fn random(n_qubits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n_qubits)
            .map(|_| narrow::<T>(gaussian_pair(&mut rng)))
            .collect();
        let mut s = Self { n_qubits, amps };
        s.normalize().expect("nonzero random state");
        s
    }

    /// Random normalized state supported on basis states with `n_alpha`
    /// α-electrons and `n_beta` β-electrons.
    pub fn random_in_sector(n_qubits: usize, n_alpha: usize, n_beta: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amask = alpha_mask(n_qubits);
        let amps: Vec<Complex<T>> = (0..1usize << n_qubits)
            .map(|b| {
                let z = gaussian_pair(&mut rng);
                let na = (b & amask).count_ones() as usize;
                let nb = (b & !amask).count_ones() as usize;
                if na == n_alpha && nb == n_beta {
                    narrow::<T>(z)
                } else {
                    Complex::default()
                }
            })
            .collect();
        let mut s = Self { n_qubits, amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        widen(self.amps[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        let a = &self.amps;
        par::sum_blocks(a.len(), |r: Range<usize>| r.map(|i| widen(a[i]).norm_sqr()).sum::<f64>())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::Numerical("cannot normalize a zero or non-finite state".into()));
        }
        let inv = T::from_f64(1.0 / n);
        self.amps.iter_mut().for_each(|a| *a = *a * inv);
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|&a| narrow::<U>(widen(a))).collect(),
        }
    }

    fn check_same(&self, other_qubits: usize) -> Result<()> {
        if self.n_qubits != other_qubits {
            return Err(Error::Dimension(format!(
                "{} vs {} qubits",
                self.n_qubits, other_qubits
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector<T>) -> Result<Complex64> {
        self.check_same(other.n_qubits)?;
        let (a, b) = (&self.amps, &other.amps);
        Ok(par::sum_blocks(a.len(), |r: Range<usize>| {
            r.map(|i| widen(a[i]).conj() * widen(b[i])).sum::<Complex64>()
        }))
    }

    /// `Σ_i c_i σ_i |ψ⟩`. The result is not normalized.
    pub fn apply_pauli_sum(&self, sum: &PauliSum) -> Result<StateVector<T>> {
        self.check_same(sum.n_qubits())?;
        let groups = group_by_flip(sum);
        let psi = &self.amps;
        let mut out = vec![Complex::default(); psi.len()];
        par::fill_indexed(&mut out, |o| {
            let mut acc = Complex64::default();
            for (x, terms) in &groups {
                let b = o ^ *x as usize;
                let mut coef = Complex64::default();
                for &(z, c) in terms {
                    if (z & b as u64).count_ones() & 1 == 1 {
                        coef -= c;
                    } else {
                        coef += c;
                    }
                }
                acc += coef * widen(psi[b]);
            }
            narrow::<T>(acc)
        });
        Ok(StateVector { n_qubits: self.n_qubits, amps: out })
    }

    /// `⟨ψ|Σ c_i σ_i|ψ⟩` for a hermitian sum.
    pub fn expectation(&self, sum: &PauliSum) -> Result<f64> {
        self.check_same(sum.n_qubits())?;
        let imag = sum.max_imag();
        if imag > crate::mapping::PRUNE_THRESHOLD {
            return Err(Error::NotHermitian(imag));
        }
        let groups = group_by_flip(sum);
        let psi = &self.amps;
        let value: Complex64 = par::sum_blocks(psi.len(), |r: Range<usize>| {
            let mut acc = Complex64::default();
            for b in r {
                let amp = widen(psi[b]);
                if amp == Complex64::default() {
                    continue;
                }
                for (x, terms) in &groups {
                    let mut coef = Complex64::default();
                    for &(z, c) in terms {
                        if (z & b as u64).count_ones() & 1 == 1 {
                            coef -= c;
                        } else {
                            coef += c;
                        }
                    }
                    acc += widen(psi[b ^ *x as usize]).conj() * coef * amp;
                }
            }
            acc
        });
        check_residue::<T>(value)
    }
}

pub(crate) fn check_residue<T: Real>(value: Complex64) -> Result<f64> {
    if value.im.abs() > T::RESIDUE_TOL * value.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "expectation of a hermitian operator has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Terms grouped by their X mask, with the `i^{n_Y}` phase folded into the
/// coefficient: `P|b⟩ = c · (−1)^{|z ∧ b|} |b ⊕ x⟩`.
pub(crate) fn group_by_flip(sum: &PauliSum) -> Vec<(u64, Vec<(u64, Complex64)>)> {
    let mut groups: std::collections::BTreeMap<u64, Vec<(u64, Complex64)>> = Default::default();
    for t in sum.iter() {
        let phase = Complex64::i().powu(t.letters.n_y());
        groups.entry(t.letters.x).or_default().push((t.letters.z, t.coeff * phase));
    }
    groups.into_iter().collect()
}

/// Mask of the α qubits (even positions) among the low `n_qubits` bits.
pub fn alpha_mask(n_qubits: usize) -> usize {
    (0..n_qubits).step_by(2).fold(0, |m, q| m | 1 << q)
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * t.cos(), r * t.sin())
}
