//! Orbital entropies and mutual information of a state.
//!
//! One-orbital entropies come from the occupation-number eigenvalues
//! `(1 − n_α − n_β + n_αβ, n_α − n_αβ, n_β − n_αβ, n_αβ)`, exact for states
//! with definite particle number and `S_z`. Two-orbital entropies diagonalize
//! the fermionic two-orbital reduced density. All entropies are in nats.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::linalg::hermitian_eigenvalues;
use crate::par;
use crate::statevector::{reduced_density, Real, StateVector};
use crate::{alpha, beta, Error, Result};

/// Eigenvalues within this distance outside `[0, 1]` are clipped; anything
/// further out signals a bug upstream.
pub const CLIP_TOLERANCE: f64 = 1e-12;
/// `Z_s1` below this is labelled single-reference.
pub const SINGLE_REFERENCE_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Default)]
struct Occupations {
    alpha: f64,
    beta: f64,
    both: f64,
    norm: f64,
}

impl std::ops::Add for Occupations {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            alpha: self.alpha + o.alpha,
            beta: self.beta + o.beta,
            both: self.both + o.both,
            norm: self.norm + o.norm,
        }
    }
}

fn check_orbital<T: Real>(state: &StateVector<T>, i: usize) -> Result<()> {
    if i >= state.n_qubits() / 2 {
        return Err(Error::Index(format!("orbital {i} of {}", state.n_qubits() / 2)));
    }
    Ok(())
}

/// The four one-orbital density eigenvalues `(empty, α, β, doubly)`.
pub fn one_orbital_eigenvalues<T: Real>(state: &StateVector<T>, i: usize) -> Result<[f64; 4]> {
    check_orbital(state, i)?;
    let (qa, qb) = (alpha(i), beta(i));
    let psi = state.amplitudes();
    let o = par::sum_blocks(psi.len(), |r: Range<usize>| {
        let mut acc = Occupations::default();
        for x in r {
            let w = psi[x].norm_sqr().to_f64();
            let (a, b) = (x >> qa & 1 == 1, x >> qb & 1 == 1);
            acc.norm += w;
            if a {
                acc.alpha += w;
            }
            if b {
                acc.beta += w;
            }
            if a && b {
                acc.both += w;
            }
        }
        acc
    });
    let (na, nb, nab) = (o.alpha / o.norm, o.beta / o.norm, o.both / o.norm);
    Ok([1.0 - na - nb + nab, na - nab, nb - nab, nab])
}

/// `−Σ ω ln ω` with `0 ln 0 = 0`, after clipping to `[0, 1]`.
pub fn entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &w in eigenvalues {
        if !(-CLIP_TOLERANCE..=1.0 + CLIP_TOLERANCE).contains(&w) {
            return Err(Error::Numerical(format!("density eigenvalue {w} outside [0, 1]")));
        }
        let w = w.clamp(0.0, 1.0);
        if w > 0.0 {
            s -= w * w.ln();
        }
    }
    Ok(s)
}

pub fn one_orbital_entropy<T: Real>(state: &StateVector<T>, i: usize) -> Result<f64> {
    entropy(&one_orbital_eigenvalues(state, i)?)
}

pub fn two_orbital_entropy<T: Real>(state: &StateVector<T>, i: usize, j: usize) -> Result<f64> {
    entropy(&hermitian_eigenvalues(reduced_density(state, &[i, j])?))
}

/// Mean one-orbital entropy normalized by `ln 4`.
pub fn z_s1_from_entropies(entropies: &[f64]) -> f64 {
    entropies.iter().sum::<f64>() / (entropies.len() as f64 * 4f64.ln())
}

pub fn z_s1<T: Real>(state: &StateVector<T>) -> Result<f64> {
    let m = state.n_qubits() / 2;
    if m == 0 {
        return Err(Error::Index("state has no orbitals".into()));
    }
    let s = (0..m).map(|i| one_orbital_entropy(state, i)).collect::<Result<Vec<_>>>()?;
    Ok(z_s1_from_entropies(&s))
}

/// `I_ij = ½(s_i + s_j − s_ij)` off the diagonal, zero on it.
pub fn mutual_information<T: Real>(state: &StateVector<T>) -> Result<DMatrix<f64>> {
    let m = state.n_qubits() / 2;
    let s1 = (0..m).map(|i| one_orbital_entropy(state, i)).collect::<Result<Vec<_>>>()?;
    mutual_information_with(state, &s1)
}

fn mutual_information_with<T: Real>(state: &StateVector<T>, s1: &[f64]) -> Result<DMatrix<f64>> {
    let m = s1.len();
    if m < 2 {
        return Err(Error::Index("mutual information needs at least two orbitals".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let s2 = par::map_vec(&pairs, |&(i, j)| two_orbital_entropy(state, i, j));
    let mut out = DMatrix::zeros(m, m);
    for (&(i, j), sij) in pairs.iter().zip(s2) {
        let v = 0.5 * (s1[i] + s1[j] - sij?);
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub label: String,
    pub n_orb: usize,
    pub n_electrons: f64,
    pub orbital_entropies: Vec<f64>,
    pub z_s1: f64,
    pub single_reference: bool,
    /// Row-major `n_orb × n_orb`.
    pub mutual_information: Vec<f64>,
}

impl DiagnosticsReport {
    pub fn mutual_information_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_orb, self.n_orb, &self.mutual_information)
    }

    /// Comma-separated matrix, one row per line.
    pub fn mutual_information_csv(&self) -> String {
        let mut out = String::new();
        for row in self.mutual_information.chunks(self.n_orb) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn diagnostics_report<T: Real>(state: &StateVector<T>, label: &str) -> Result<DiagnosticsReport> {
    let m = state.n_qubits() / 2;
    if m == 0 {
        return Err(Error::Index("state has no orbitals".into()));
    }
    let s1 = (0..m).map(|i| one_orbital_entropy(state, i)).collect::<Result<Vec<_>>>()?;
    let mi = if m >= 2 { mutual_information_with(state, &s1)? } else { DMatrix::zeros(1, 1) };
    let z = z_s1_from_entropies(&s1);
    let psi = state.amplitudes();
    let norm: f64 = psi.iter().map(|a| a.norm_sqr().to_f64()).sum();
    let n_electrons =
        psi.iter().enumerate().map(|(x, a)| a.norm_sqr().to_f64() * x.count_ones() as f64).sum::<f64>() / norm;
    Ok(DiagnosticsReport {
        label: label.to_string(),
        n_orb: m,
        n_electrons,
        orbital_entropies: s1,
        z_s1: z,
        single_reference: z < SINGLE_REFERENCE_THRESHOLD,
        mutual_information: mi.transpose().as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_reference_t1;
    use crate::statevector::index_from_occupation;
    use num_complex::Complex64;

    fn ket(s: &str) -> StateVector<f64> {
        StateVector::basis(s.len(), index_from_occupation(s).unwrap()).unwrap()
    }

    #[test]
    fn determinant_values() {
        let s = ket("1110101010");
        assert_eq!(one_orbital_eigenvalues(&s, 0).unwrap(), [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(one_orbital_eigenvalues(&s, 1).unwrap(), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(z_s1(&s).unwrap(), 0.0);
        assert!(mutual_information(&s).unwrap().iter().all(|&v| v.abs() < 1e-15));
        assert!(one_orbital_eigenvalues(&s, 5).is_err());
    }

    #[test]
    fn t1_triplet_values() {
        let s = build_reference_t1(5, 6, 1).unwrap().to_state::<f64>().unwrap();
        let w = one_orbital_eigenvalues(&s, 2).unwrap();
        for (a, b) in w.iter().zip([0.5, 0.5, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((z_s1(&s).unwrap() - 0.2).abs() < 1e-15);
        let mi = mutual_information(&s).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if (i, j) == (2, 3) || (i, j) == (3, 2) { 2f64.ln() } else { 0.0 };
                assert!((mi[(i, j)] - expect).abs() < 1e-12, "I[{i},{j}] = {}", mi[(i, j)]);
            }
        }
    }

    #[test]
    fn maximally_mixed_orbitals() {
        // Each orbital in an equal mixture of its four occupations: the
        // product of one uniform superposition per orbital.
        let m = 3;
        let amps = vec![Complex64::new(1.0, 0.0); 1 << (2 * m)];
        let mut s = StateVector::<f64>::from_amplitudes(2 * m, amps.clone()).unwrap();
        s.normalize().unwrap();
        assert!((z_s1(&s).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn routes_agree_in_sector() {
        for seed in 0..20 {
            let s = StateVector::<f64>::random_in_sector(8, 2, 1, seed).unwrap();
            for i in 0..4 {
                let mut a = one_orbital_eigenvalues(&s, i).unwrap().to_vec();
                a.sort_by(f64::total_cmp);
                let b = hermitian_eigenvalues(reduced_density(&s, &[i]).unwrap());
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn clipping() {
        assert_eq!(entropy(&[1.0 + 1e-13, -1e-13]).unwrap(), 0.0);
        assert!(entropy(&[1.1, -0.1]).is_err());
    }

    #[test]
    fn report_layout() {
        let s = build_reference_t1(5, 6, 1).unwrap().to_state::<f64>().unwrap();
        let r = diagnostics_report(&s, "T1").unwrap();
        assert_eq!(r.mutual_information.len(), 25);
        assert!((r.mutual_information[2 * 5 + 3] - 2f64.ln()).abs() < 1e-12);
        assert!((r.n_electrons - 6.0).abs() < 1e-12);
        assert!(!r.single_reference);
        assert_eq!(r.mutual_information_csv().lines().count(), 5);
    }
}
