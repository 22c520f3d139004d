//! Exact active-space solver working directly on determinants.
//!
//! The sector Hamiltonian is assembled with second-quantized bit operations on
//! occupation strings, independently of the Pauli-string machinery, so it can
//! serve as a cross-check for the qubit Hamiltonian and the VQE.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::integrals::ActiveSpaceIntegrals;
use crate::linalg::symmetric_eigh;
use crate::par;
use crate::statevector::{alpha_mask, StateVector};
use crate::{alpha, beta, Error, Result};

/// Largest register handled by the dense eigensolver.
pub const DENSE_QUBIT_CAP: usize = 16;
/// Largest register handled at all.
pub const SPARSE_QUBIT_CAP: usize = 24;
/// Tolerance on `|⟨S²⟩ − S(S+1)|` for spin filtering.
pub const SPIN_TOLERANCE: f64 = 1e-6;
/// Energy window within which levels are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    /// Dense up to [`DENSE_QUBIT_CAP`] qubits, Lanczos beyond.
    Auto,
    Dense,
    Lanczos { n_roots: usize },
}

/// Determinants with `n_electrons` electrons and `2·S_z = two_sz`, ascending.
pub fn sector_basis(n_qubits: usize, n_electrons: usize, two_sz: i64) -> Result<Vec<usize>> {
    let twice = n_electrons as i64 + two_sz;
    if n_qubits % 2 == 1 || twice < 0 || twice % 2 == 1 {
        return Err(Error::Oracle(format!("no determinants with N = {n_electrons}, 2Sz = {two_sz}")));
    }
    let n_alpha = (twice / 2) as usize;
    let n_beta = n_electrons
        .checked_sub(n_alpha)
        .ok_or_else(|| Error::Oracle(format!("no determinants with N = {n_electrons}, 2Sz = {two_sz}")))?;
    let m = n_qubits / 2;
    if n_alpha > m || n_beta > m {
        return Err(Error::Oracle(format!("no determinants with N = {n_electrons}, 2Sz = {two_sz}")));
    }
    let amask = alpha_mask(n_qubits);
    let out: Vec<usize> = (0..1usize << n_qubits)
        .filter(|&b| {
            (b & amask).count_ones() as usize == n_alpha && (b & !amask).count_ones() as usize == n_beta
        })
        .collect();
    Ok(out)
}

#[inline]
fn annihilate(x: usize, q: usize) -> Option<(usize, bool)> {
    if x >> q & 1 == 0 {
        return None;
    }
    Some((x ^ 1 << q, (x & ((1 << q) - 1)).count_ones() & 1 == 1))
}

#[inline]
fn create(x: usize, q: usize) -> Option<(usize, bool)> {
    if x >> q & 1 == 1 {
        return None;
    }
    Some((x | 1 << q, (x & ((1 << q) - 1)).count_ones() & 1 == 1))
}

/// `H|x⟩` as `(determinant, coefficient)` pairs, merged and sorted.
fn apply_to_determinant(ints: &ActiveSpaceIntegrals, x: usize) -> Vec<(usize, f64)> {
    let m = ints.n_orb;
    let n = 2 * m;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    acc.insert(x, ints.core_energy);
    let occupied: Vec<usize> = (0..n).filter(|&q| x >> q & 1 == 1).collect();
    // One-body: h_pq a†_pσ a_qσ
    for &qs in &occupied {
        let (q, spin) = (qs / 2, qs % 2);
        let (y, s1) = annihilate(x, qs).unwrap();
        for p in 0..m {
            let hpq = ints.h[(p, q)];
            if hpq == 0.0 {
                continue;
            }
            if let Some((z, s2)) = create(y, 2 * p + spin) {
                *acc.entry(z).or_default() += if s1 ^ s2 { -hpq } else { hpq };
            }
        }
    }
    // Two-body: ½ g_pqrs a†_pσ a†_rτ a_sτ a_qσ
    for &qs in &occupied {
        let (q, sig) = (qs / 2, qs % 2);
        let (y1, s1) = annihilate(x, qs).unwrap();
        for &ss in &occupied {
            let Some((y2, s2)) = annihilate(y1, ss) else { continue };
            let (s, tau) = (ss / 2, ss % 2);
            for r in 0..m {
                let Some((y3, s3)) = create(y2, 2 * r + tau) else { continue };
                for p in 0..m {
                    let g = ints.g(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    let Some((z, s4)) = create(y3, 2 * p + sig) else { continue };
                    let v = 0.5 * g;
                    *acc.entry(z).or_default() += if s1 ^ s2 ^ s3 ^ s4 { -v } else { v };
                }
            }
        }
    }
    acc.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

/// `S²|x⟩ = (S⁻S⁺ + S_z² + S_z)|x⟩`.
fn s2_on_determinant(x: usize, n_orb: usize) -> Vec<(usize, f64)> {
    let amask = alpha_mask(2 * n_orb);
    let sz = ((x & amask).count_ones() as f64 - (x & !amask).count_ones() as f64) / 2.0;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    acc.insert(x, sz * sz + sz);
    // S⁺ = Σ_p a†_pα a_pβ, S⁻ = Σ_p a†_pβ a_pα
    for p in 0..n_orb {
        let Some((y, s1)) = annihilate(x, beta(p)) else { continue };
        let Some((y, s2)) = create(y, alpha(p)) else { continue };
        for q in 0..n_orb {
            let Some((z, s3)) = annihilate(y, alpha(q)) else { continue };
            let Some((z, s4)) = create(z, beta(q)) else { continue };
            *acc.entry(z).or_default() += if s1 ^ s2 ^ s3 ^ s4 { -1.0 } else { 1.0 };
        }
    }
    acc.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

/// Real symmetric sparse matrix over a determinant basis, row-compressed.
#[derive(Clone, Debug)]
pub struct SectorMatrix {
    pub basis: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SectorMatrix {
    fn build<F>(basis: Vec<usize>, column: F) -> Result<Self>
    where
        F: Fn(usize) -> Vec<(usize, f64)> + Sync,
    {
        let rows: Vec<Vec<(usize, f64)>> = par::map_vec(&basis, |&x| {
            column(x)
                .into_iter()
                .map(|(y, v)| (basis.binary_search(&y).expect("operator leaves the sector"), v))
                .collect()
        });
        let mut row_ptr = Vec::with_capacity(basis.len() + 1);
        row_ptr.push(0);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { basis, row_ptr, cols, vals })
    }

    pub fn hamiltonian(ints: &ActiveSpaceIntegrals, basis: Vec<usize>) -> Result<Self> {
        Self::build(basis, |x| apply_to_determinant(ints, x))
    }

    pub fn spin_squared(n_orb: usize, basis: Vec<usize>) -> Result<Self> {
        Self::build(basis, |x| s2_on_determinant(x, n_orb))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Row `i` holds `⟨basis_j|O|basis_i⟩`; the operators here are real
    /// symmetric so rows and columns coincide.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(self.cols[k], i)] += self.vals[k];
            }
        }
        d
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, &vi) in v.iter().enumerate().take(self.dim()) {
            if vi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += self.vals[k] * vi;
            }
        }
        out
    }

    fn expectation(&self, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorSpectrum {
    pub n_electrons: usize,
    pub two_sz: i64,
    #[serde(skip)]
    pub basis: Vec<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors over `basis`.
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub spin_squared: Vec<f64>,
}

impl SectorSpectrum {
    /// Eigenvector `i` embedded in the full register.
    pub fn state(&self, i: usize, n_qubits: usize) -> Result<StateVector<f64>> {
        if i >= self.eigenvalues.len() {
            return Err(Error::Index(format!("root {i} of {}", self.eigenvalues.len())));
        }
        let kets: Vec<(usize, Complex64)> = self
            .basis
            .iter()
            .enumerate()
            .map(|(r, &b)| (b, Complex64::new(self.eigenvectors[(r, i)], 0.0)))
            .collect();
        StateVector::from_kets(n_qubits, &kets)
    }

    /// Index of the lowest root with `⟨S²⟩ = S(S+1)`.
    pub fn lowest_with_spin(&self, spin: usize) -> Option<usize> {
        let target = (spin * (spin + 1)) as f64;
        self.spin_squared.iter().position(|&s2| (s2 - target).abs() <= SPIN_TOLERANCE)
    }
}

fn check_cap(ints: &ActiveSpaceIntegrals) -> Result<()> {
    if ints.n_qubits() > SPARSE_QUBIT_CAP {
        return Err(Error::Oracle(format!(
            "{} qubits exceeds the exact-solver cap of {SPARSE_QUBIT_CAP}",
            ints.n_qubits()
        )));
    }
    Ok(())
}

/// Diagonalizes the Hamiltonian in one `(N, 2S_z)` sector.
pub fn sector_spectrum(ints: &ActiveSpaceIntegrals, n_electrons: usize, two_sz: i64, solver: Solver) -> Result<SectorSpectrum> {
    check_cap(ints)?;
    let n = ints.n_qubits();
    let basis = sector_basis(n, n_electrons, two_sz)?;
    let h = SectorMatrix::hamiltonian(ints, basis.clone())?;
    let solver = match solver {
        Solver::Auto if n <= DENSE_QUBIT_CAP => Solver::Dense,
        Solver::Auto => Solver::Lanczos { n_roots: 8 },
        s => s,
    };
    let (mut vals, mut vecs) = match solver {
        Solver::Dense => {
            if n > DENSE_QUBIT_CAP {
                return Err(Error::Oracle(format!("dense solver is capped at {DENSE_QUBIT_CAP} qubits")));
            }
            symmetric_eigh(h.to_dense())
        }
        Solver::Lanczos { n_roots } => lanczos(&h, n_roots.min(h.dim()), 1e-10)?,
        Solver::Auto => unreachable!(),
    };
    let s2_op = SectorMatrix::spin_squared(ints.n_orb, basis.clone())?;
    resolve_degenerate_spins(&s2_op, &mut vals, &mut vecs);
    let spin_squared = (0..vals.len())
        .map(|i| s2_op.expectation(vecs.column(i).as_slice()))
        .collect();
    Ok(SectorSpectrum { n_electrons, two_sz, basis, eigenvalues: vals, eigenvectors: vecs, spin_squared })
}

/// Within each degenerate cluster, rotates the eigenvectors to diagonalize
/// `S²` so every root carries a definite spin.
fn resolve_degenerate_spins(s2: &SectorMatrix, vals: &mut [f64], vecs: &mut DMatrix<f64>) {
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end] - vals[end - 1] <= DEGENERACY_TOL * vals[start].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.columns(start, end - start).into_owned();
            let s2_block: Vec<DVector<f64>> = (0..block.ncols())
                .map(|c| DVector::from_vec(s2.apply(block.column(c).as_slice())))
                .collect();
            let k = end - start;
            let proj = DMatrix::from_fn(k, k, |i, j| block.column(i).dot(&s2_block[j]));
            let proj = (&proj + proj.transpose()) * 0.5;
            let (_, y) = symmetric_eigh(proj);
            let rotated = &block * y;
            vecs.columns_mut(start, k).copy_from(&rotated);
        }
        start = end;
    }
}

/// Lowest `n_roots` eigenpairs by Krylov expansion with full
/// reorthogonalization and thick restarts.
fn lanczos(h: &SectorMatrix, n_roots: usize, tol: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.dim();
    if n_roots == 0 {
        return Ok((Vec::new(), DMatrix::zeros(n, 0)));
    }
    if n <= 2 * n_roots + 8 {
        return Ok(truncate(symmetric_eigh(h.to_dense()), n_roots));
    }
    let max_basis = (2 * n_roots + 30).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut start);
    let mut v: Vec<Vec<f64>> = vec![start];
    let mut w: Vec<Vec<f64>> = vec![h.apply(&v[0])];
    for _restart in 0..500 {
        // Expand.
        while v.len() < max_basis {
            let mut next = w.last().unwrap().clone();
            if !orthonormalize(&mut next, &v) {
                // Invariant subspace: continue from a random direction.
                next = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if !orthonormalize(&mut next, &v) {
                    break;
                }
            }
            w.push(h.apply(&next));
            v.push(next);
        }
        // Rayleigh-Ritz.
        let k = v.len();
        let t = DMatrix::from_fn(k, k, |i, j| dot(&v[i], &w[j]));
        let t = (&t + t.transpose()) * 0.5;
        let (theta, y) = symmetric_eigh(t);
        let combine = |basis: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (b, c) in basis.iter().zip(y.column(col).iter()) {
                out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
            }
            out
        };
        let mut unconverged: Option<Vec<f64>> = None;
        let wanted = n_roots.min(k);
        for (i, &t) in theta.iter().enumerate().take(wanted) {
            let x = combine(&v, i);
            let hx = combine(&w, i);
            let r: Vec<f64> = hx.iter().zip(&x).map(|(a, b)| a - t * b).collect();
            if dot(&r, &r).sqrt() > tol * t.abs().max(1.0) {
                unconverged = Some(r);
                break;
            }
        }
        let keep = (n_roots + 4).min(k);
        let new_v: Vec<Vec<f64>> = (0..keep).map(|i| combine(&v, i)).collect();
        let new_w: Vec<Vec<f64>> = (0..keep).map(|i| combine(&w, i)).collect();
        match unconverged {
            None if k >= n_roots => {
                let vals = theta[..n_roots].to_vec();
                let vecs = DMatrix::from_fn(n, n_roots, |r, c| new_v[c][r]);
                return Ok((vals, vecs));
            }
            _ => {
                v = new_v;
                w = new_w;
                if let Some(mut r) = unconverged {
                    if orthonormalize(&mut r, &v) {
                        w.push(h.apply(&r));
                        v.push(r);
                    }
                }
            }
        }
    }
    Err(Error::Oracle("Lanczos did not converge".into()))
}

fn truncate((vals, vecs): (Vec<f64>, DMatrix<f64>), k: usize) -> (Vec<f64>, DMatrix<f64>) {
    (vals[..k].to_vec(), vecs.columns(0, k).into_owned())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Two passes of Gram-Schmidt; false if nothing is left.
fn orthonormalize(x: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let before = dot(x, x).sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
    let after = dot(x, x).sqrt();
    if after <= 1e-10 * before.max(1e-300) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= after);
    true
}

/// Lowest energy with total spin `S`, from the `2S_z = 2S` sector.
pub fn casci_energy(ints: &ActiveSpaceIntegrals, n_electrons: usize, spin: usize) -> Result<f64> {
    casci_state(ints, n_electrons, spin).map(|(e, _)| e)
}

/// Lowest spin-`S` energy and its eigenvector in the full register.
pub fn casci_state(ints: &ActiveSpaceIntegrals, n_electrons: usize, spin: usize) -> Result<(f64, StateVector<f64>)> {
    let spec = sector_spectrum(ints, n_electrons, 2 * spin as i64, Solver::Auto)?;
    let i = spec
        .lowest_with_spin(spin)
        .ok_or_else(|| Error::Oracle(format!("no S = {spin} level among the computed roots")))?;
    Ok((spec.eigenvalues[i], spec.state(i, ints.n_qubits())?))
}

/// Lowest energy among all determinants with `n_alpha`/`n_beta` electrons,
/// any total spin.
pub fn sector_minimum(ints: &ActiveSpaceIntegrals, n_alpha: usize, n_beta: usize) -> Result<f64> {
    let spec = sector_spectrum(ints, n_alpha + n_beta, n_alpha as i64 - n_beta as i64, Solver::Auto)?;
    Ok(spec.eigenvalues[0])
}

/// Every eigenvalue of the Hamiltonian on the full Fock space, ascending.
pub fn fock_spectrum(ints: &ActiveSpaceIntegrals) -> Result<Vec<f64>> {
    let n = ints.n_qubits();
    if n > DENSE_QUBIT_CAP {
        return Err(Error::Oracle("full spectra are limited to the dense cap".into()));
    }
    let m = ints.n_orb as i64;
    let mut all = Vec::with_capacity(1 << n);
    for n_alpha in 0..=m {
        for n_beta in 0..=m {
            let spec = sector_spectrum(ints, (n_alpha + n_beta) as usize, n_alpha - n_beta, Solver::Dense)?;
            all.extend(spec.eigenvalues);
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}
