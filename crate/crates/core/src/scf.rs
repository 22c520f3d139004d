//! Orbital-optimized state-averaged VQE.
//!
//! Each macro-iteration runs the VQE on the current orbitals, forms the
//! state-averaged RDMs, and takes one steepest-descent orbital step
//! `κ = −η·G` with step halving until the RDM energy decreases. The circuit
//! parameters are carried over between macros.

use std::ops::{Add, Range};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::ansatz::AnsatzProgram;
use crate::diagnostics::{diagnostics_report, DiagnosticsReport};
use crate::integrals::{energy_from_rdms, rotate_integrals, ActiveSpaceIntegrals, OrbitalRotation};
use crate::linalg::symmetric_eigh;
use crate::mapping::{build_qubit_hamiltonian, build_spin_observables};
use crate::par;
use crate::statevector::{Real, StateVector};
use crate::vqe::{run_vqe, SaVqeProblem, TargetState, TraceRow, VqeOptions, VqeResult, VqeTrace};
use crate::{Error, Result};

/// Spin-summed one- and two-particle reduced density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct RdmPair {
    pub gamma: DMatrix<f64>,
    /// `Γ[p,q,r,s] = Σ_στ ⟨a†_pσ a†_rτ a_sτ a_qσ⟩`, row-major.
    pub two: Vec<f64>,
}

impl RdmPair {
    pub fn zeros(n_orb: usize) -> Self {
        Self { gamma: DMatrix::zeros(n_orb, n_orb), two: vec![0.0; n_orb.pow(4)] }
    }

    pub fn n_orb(&self) -> usize {
        self.gamma.nrows()
    }

    #[inline]
    pub fn two(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let m = self.n_orb();
        self.two[((p * m + q) * m + r) * m + s]
    }

    /// Checks symmetry, occupation bounds, trace and the partial-trace
    /// relation `Σ_r Γ[p,q,r,r] = (N−1)·γ_pq`.
    pub fn check(&self, n_electrons: f64, tol: f64) -> Result<()> {
        let m = self.n_orb();
        let fail = |what: String| Err(Error::Numerical(format!("RDM check failed: {what}")));
        if (&self.gamma - self.gamma.transpose()).amax() > tol {
            return fail("1-RDM not symmetric".into());
        }
        let (occ, _) = symmetric_eigh(self.gamma.clone());
        if occ.iter().any(|&n| n < -tol || n > 2.0 + tol) {
            return fail(format!("natural occupations {occ:?} outside [0, 2]"));
        }
        if (self.gamma.trace() - n_electrons).abs() > tol {
            return fail(format!("trace {} for {n_electrons} electrons", self.gamma.trace()));
        }
        for p in 0..m {
            for q in 0..m {
                let partial: f64 = (0..m).map(|r| self.two(p, q, r, r)).sum();
                if (partial - (n_electrons - 1.0) * self.gamma[(p, q)]).abs() > 10.0 * tol {
                    return fail(format!("partial trace of the 2-RDM at ({p},{q})"));
                }
                for r in 0..m {
                    for s in 0..m {
                        if (self.two(p, q, r, s) - self.two(r, s, p, q)).abs() > tol {
                            return fail(format!("2-RDM pair symmetry at ({p},{q},{r},{s})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
#[derive(Default)]
struct Acc(Vec<Complex64>);

impl Add for Acc {
    type Output = Acc;

    fn add(mut self, rhs: Acc) -> Acc {
        if self.0.is_empty() {
            return rhs;
        }
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}


/// `(a_k ψ)[y]` for a `y` with bit `k` clear.
#[inline]
fn lowered(psi: &[Complex64], y: usize, k: usize) -> Complex64 {
    let x = y | 1 << k;
    let a = psi[x];
    if (x & ((1 << k) - 1)).count_ones() & 1 == 1 {
        -a
    } else {
        a
    }
}

/// Spin-summed RDMs of a normalized state.
pub fn compute_rdms<T: Real>(state: &StateVector<T>) -> RdmPair {
    let n = state.n_qubits();
    let m = n / 2;
    let psi: Vec<Complex64> = state.amplitudes().iter().map(|a| Complex64::new(a.re.to_f64(), a.im.to_f64())).collect();
    let dim = psi.len();

    // Spin-orbital 1-RDM: D[i][j] = ⟨a†_i a_j⟩ = Σ_y conj((a_i ψ)[y]) (a_j ψ)[y].
    let d1 = par::sum_blocks(dim, |r: Range<usize>| {
        let mut acc = vec![Complex64::default(); n * n];
        let mut v = vec![Complex64::default(); n];
        for y in r {
            let mut any = false;
            for (k, vk) in v.iter_mut().enumerate().take(n) {
                *vk = if y >> k & 1 == 0 { lowered(&psi, y, k) } else { Complex64::default() };
                any |= *vk != Complex64::default();
            }
            if !any {
                continue;
            }
            for i in 0..n {
                if v[i] == Complex64::default() {
                    continue;
                }
                let ci = v[i].conj();
                for j in 0..n {
                    acc[i * n + j] += ci * v[j];
                }
            }
        }
        Acc(acc)
    });

    // Pair amplitudes φ_ab = a_a a_b ψ for a < b, and their Gram matrix
    // G[(a,b),(c,d)] = ⟨φ_ab|φ_cd⟩.
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let np = pairs.len();
    let gram = par::sum_blocks(dim, |r: Range<usize>| {
        let mut acc = vec![Complex64::default(); np * np];
        let mut nz: Vec<(usize, Complex64)> = Vec::with_capacity(np);
        for y in r {
            nz.clear();
            for (idx, &(a, b)) in pairs.iter().enumerate() {
                if y >> a & 1 == 1 || y >> b & 1 == 1 {
                    continue;
                }
                // a_b first, then a_a.
                let x = y | 1 << a | 1 << b;
                let mut amp = psi[x];
                if amp == Complex64::default() {
                    continue;
                }
                let after_b = x ^ 1 << b;
                let parity = (x & ((1 << b) - 1)).count_ones() + (after_b & ((1 << a) - 1)).count_ones();
                if parity & 1 == 1 {
                    amp = -amp;
                }
                nz.push((idx, amp));
            }
            for &(i, vi) in &nz {
                let ci = vi.conj();
                for &(j, vj) in &nz {
                    acc[i * np + j] += ci * vj;
                }
            }
        }
        Acc(acc)
    });

    let d1 = if d1.0.is_empty() { vec![Complex64::default(); n * n] } else { d1.0 };
    let gram = if gram.0.is_empty() { vec![Complex64::default(); np * np] } else { gram.0 };
    let pair_index = |a: usize, b: usize| -> (usize, bool) {
        // φ_ab = −φ_ba
        let (lo, hi, neg) = if a < b { (a, b, false) } else { (b, a, true) };
        let idx = lo * n - lo * (lo + 1) / 2 + (hi - lo - 1);
        (idx, neg)
    };

    let mut gamma = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            gamma[(p, q)] = (0..2).map(|s| d1[(2 * p + s) * n + 2 * q + s].re).sum();
        }
    }
    // ⟨a†_i a†_k a_l a_j⟩ = ⟨a_k a_i ψ | a_l a_j ψ⟩ = ⟨φ_ki|φ_lj⟩
    let mut two = vec![0.0; m.pow(4)];
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let mut v = 0.0;
                    for sig in 0..2 {
                        for tau in 0..2 {
                            let (i, j, k, l) = (2 * p + sig, 2 * q + sig, 2 * r + tau, 2 * s + tau);
                            if i == k || j == l {
                                continue;
                            }
                            let (bra, nb) = pair_index(k, i);
                            let (ket, nk) = pair_index(l, j);
                            let g = gram[bra * np + ket].re;
                            v += if nb ^ nk { -g } else { g };
                        }
                    }
                    two[((p * m + q) * m + r) * m + s] = v;
                }
            }
        }
    }
    RdmPair { gamma, two }
}

/// Weighted average of per-state RDMs.
pub fn sa_rdms(rdms: &[RdmPair], weights: &[f64]) -> Result<RdmPair> {
    if rdms.is_empty() || rdms.len() != weights.len() {
        return Err(Error::Dimension("one weight per RDM required".into()));
    }
    let m = rdms[0].n_orb();
    let mut out = RdmPair::zeros(m);
    for (r, &w) in rdms.iter().zip(weights) {
        if r.n_orb() != m {
            return Err(Error::Dimension("RDMs of different sizes".into()));
        }
        out.gamma += &r.gamma * w;
        out.two.iter_mut().zip(&r.two).for_each(|(o, x)| *o += w * x);
    }
    Ok(out)
}

/// `G_pq = ∂E/∂κ_pq` at `κ = 0` with the RDMs held fixed. Antisymmetric.
pub fn orbital_gradient(ints: &ActiveSpaceIntegrals, rdms: &RdmPair) -> Result<DMatrix<f64>> {
    let m = ints.n_orb;
    if rdms.n_orb() != m {
        return Err(Error::Dimension(format!("RDMs for {} orbitals, integrals for {m}", rdms.n_orb())));
    }
    // X_xy = ∂E/∂K_xy for U = 1 + K acting on every orbital index.
    let hg = &ints.h * &rdms.gamma;
    let hgt = &ints.h * rdms.gamma.transpose();
    let mut x = &hg + &hgt;
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;
    let g = &ints.g;
    let t = &rdms.two;
    for a in 0..m {
        for b in 0..m {
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        acc += g[idx(a, i, j, k)] * t[idx(b, i, j, k)]
                            + g[idx(i, a, j, k)] * t[idx(i, b, j, k)]
                            + g[idx(i, j, a, k)] * t[idx(i, j, b, k)]
                            + g[idx(i, j, k, a)] * t[idx(i, j, k, b)];
                    }
                }
            }
            x[(a, b)] += 0.5 * acc;
        }
    }
    Ok(&x - x.transpose())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OoOptions {
    pub enabled: bool,
    pub max_macros: usize,
    /// Initial orbital step length `η`.
    pub step: f64,
    pub max_halvings: usize,
    pub energy_tolerance: f64,
    pub gradient_tolerance: f64,
}

impl Default for OoOptions {
    fn default() -> Self {
        Self {
            enabled: true,
            max_macros: 100,
            step: 0.1,
            max_halvings: 20,
            energy_tolerance: 1e-7,
            gradient_tolerance: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacroRow {
    pub index: usize,
    pub e_avg_pre: f64,
    pub e_avg_post: f64,
    pub grad_max: f64,
    pub kappa_step_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MacroTrace {
    pub rows: Vec<MacroRow>,
}

impl MacroTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("macro,E_avg_pre,E_avg_post,grad_max,kappa_step_norm\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.index, r.e_avg_pre, r.e_avg_post, r.grad_max, r.kappa_step_norm
            ));
        }
        out
    }
}

/// Converged quantities of one target state.
#[derive(Clone, Debug)]
pub struct SpinStateResult {
    pub spin: usize,
    pub weight: f64,
    pub energy: f64,
    pub number: f64,
    pub spin_z: f64,
    pub spin_squared: f64,
    pub rdms: RdmPair,
    pub diagnostics: DiagnosticsReport,
    pub state: StateVector<f64>,
}

#[derive(Clone, Debug)]
pub struct OoResult {
    pub states: Vec<SpinStateResult>,
    pub e_avg: f64,
    pub theta: Vec<f64>,
    pub vqe_trace: VqeTrace,
    pub macro_trace: MacroTrace,
    /// Accumulated rotation; `rotate_integrals(original, kappa_total)`
    /// reproduces `integrals`.
    pub kappa_total: OrbitalRotation,
    pub rotation: DMatrix<f64>,
    pub integrals: ActiveSpaceIntegrals,
    pub converged: bool,
    /// Set when the line search found no descent.
    pub line_search_failed: bool,
}

/// Everything the macro loop needs besides the integrals.
#[derive(Clone, Debug)]
pub struct OoProblem {
    pub states: Vec<TargetState>,
    pub program: AnsatzProgram,
    pub tolerance: f64,
    pub window: usize,
    pub max_steps: usize,
}

fn rdm_tolerance<T: Real>() -> f64 {
    T::RESIDUE_TOL.max(1e-9)
}

fn spin_results(
    vqe: &VqeResult,
    states: &[TargetState],
    rdms: Vec<RdmPair>,
) -> Result<Vec<SpinStateResult>> {
    let obs = build_spin_observables(vqe.states.first().map_or(0, |s| s.n_qubits() / 2));
    let mut out = Vec::new();
    for (i, (t, rdm)) in states.iter().zip(rdms).enumerate() {
        let state = vqe.states[i].clone();
        let label = format!("S={}", t.reference.spin);
        let diagnostics = diagnostics_report(&state, &label)?;
        let number = state.expectation(&obs.n)?;
        let spin_z = state.expectation(&obs.sz)?;
        let spin_squared = state.expectation(&obs.s2)?;
        out.push(SpinStateResult {
            spin: t.reference.spin,
            weight: t.weight,
            energy: vqe.energies[i],
            number,
            spin_z,
            spin_squared,
            rdms: rdm,
            diagnostics,
            state,
        });
    }
    Ok(out)
}

/// Alternates VQE and orbital steps until both the averaged energy and the
/// orbital gradient settle, or `max_macros` is reached. With orbital
/// optimization disabled this is a single VQE run.
pub fn run_oo_vqe<T: Real>(
    ints: &ActiveSpaceIntegrals,
    problem: &OoProblem,
    vqe_options: &VqeOptions,
    oo: &OoOptions,
    theta0: &[f64],
) -> Result<OoResult> {
    let m = ints.n_orb;
    let weights: Vec<f64> = problem.states.iter().map(|s| s.weight).collect();
    let n_electrons = problem.states[0].reference.n_electrons() as f64;
    let tol = rdm_tolerance::<T>();
    let mut working = ints.clone();
    let mut u_total = DMatrix::<f64>::identity(m, m);
    let mut theta = theta0.to_vec();
    let mut offset = vqe_options.step_offset;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut macro_trace = MacroTrace::default();
    let mut prev_post: Option<f64> = None;
    let mut converged = false;
    let mut line_search_failed = false;
    let max_macros = if oo.enabled { oo.max_macros.max(1) } else { 1 };
    let mut last: Option<(VqeResult, Vec<RdmPair>)> = None;

    for macro_index in 0..max_macros {
        let mut sa = SaVqeProblem::new(build_qubit_hamiltonian(&working), problem.states.clone(), problem.program.clone());
        sa.tolerance = problem.tolerance;
        sa.window = problem.window;
        sa.max_steps = problem.max_steps;
        let opts = VqeOptions { step_offset: offset, ..*vqe_options };
        let vqe = run_vqe::<T>(&sa, &opts, &theta)?;
        offset += vqe.steps;
        theta = vqe.theta.clone();
        rows.extend(vqe.trace.rows.iter().cloned());

        let rdms: Vec<RdmPair> = par::map_vec(&vqe.states, compute_rdms);
        for r in &rdms {
            r.check(n_electrons, tol)?;
        }
        let e_pre = vqe.e_avg;
        if let Some(p) = prev_post {
            if e_pre > p + tol * p.abs().max(1.0) {
                return Err(Error::Numerical(format!("averaged energy rose across a macro: {p} -> {e_pre}")));
            }
        }
        let vqe_converged = vqe.converged;
        if !oo.enabled {
            converged = vqe_converged;
            last = Some((vqe, rdms));
            break;
        }
        let averaged = sa_rdms(&rdms, &weights)?;
        let grad = orbital_gradient(&working, &averaged)?;
        let grad_max = grad.amax();
        let settled = prev_post.is_none_or(|p| (e_pre - p).abs() <= oo.energy_tolerance);
        if grad_max <= oo.gradient_tolerance && settled {
            macro_trace.rows.push(MacroRow {
                index: macro_index,
                e_avg_pre: e_pre,
                e_avg_post: e_pre,
                grad_max,
                kappa_step_norm: 0.0,
            });
            converged = vqe_converged;
            last = Some((vqe, rdms));
            break;
        }
        if macro_index + 1 == max_macros || grad_max <= oo.gradient_tolerance {
            // No rotation on the final macro, or nothing to rotate.
            macro_trace.rows.push(MacroRow {
                index: macro_index,
                e_avg_pre: e_pre,
                e_avg_post: e_pre,
                grad_max,
                kappa_step_norm: 0.0,
            });
            prev_post = Some(e_pre);
            last = Some((vqe, rdms));
            continue;
        }
        let e_ref = energy_from_rdms(&working, &averaged.gamma, &averaged.two)?;
        let trial = |eta: f64| -> Result<(OrbitalRotation, ActiveSpaceIntegrals, f64)> {
            let step = OrbitalRotation::from_matrix(&(&grad * -eta));
            let candidate = rotate_integrals(&working, &step)?;
            let e = energy_from_rdms(&candidate, &averaged.gamma, &averaged.two)?;
            Ok((step, candidate, e))
        };
        let mut eta = oo.step;
        let mut accepted = None;
        for _ in 0..=oo.max_halvings {
            let t = trial(eta)?;
            if t.2 < e_ref {
                accepted = Some(t);
                break;
            }
            eta *= 0.5;
        }
        // An accepted first trial may be far too short: keep doubling while
        // the energy keeps dropping.
        if accepted.is_some() && eta == oo.step {
            for _ in 0..oo.max_halvings {
                eta *= 2.0;
                let t = trial(eta)?;
                if accepted.as_ref().is_some_and(|a| t.2 < a.2) {
                    accepted = Some(t);
                } else {
                    break;
                }
            }
        }
        let Some((step, candidate, e_post)) = accepted else {
            macro_trace.rows.push(MacroRow {
                index: macro_index,
                e_avg_pre: e_pre,
                e_avg_post: e_pre,
                grad_max,
                kappa_step_norm: 0.0,
            });
            line_search_failed = true;
            last = Some((vqe, rdms));
            break;
        };
        candidate.validate(1e-10)?;
        u_total = &u_total * step.unitary();
        working = candidate;
        // The next VQE starts from the same circuit, whose energy in the new
        // orbitals is exactly the rotated RDM energy.
        macro_trace.rows.push(MacroRow {
            index: macro_index,
            e_avg_pre: e_pre,
            e_avg_post: e_post,
            grad_max,
            kappa_step_norm: step.norm(),
        });
        prev_post = Some(e_post);
        last = Some((vqe, rdms));
    }

    let (vqe, rdms) = last.expect("at least one macro");
    let states = spin_results(&vqe, &problem.states, rdms)?;
    let spins = problem.states.iter().map(|s| s.reference.spin).collect();
    Ok(OoResult {
        states,
        e_avg: vqe.e_avg,
        theta,
        vqe_trace: VqeTrace { spins, rows },
        macro_trace,
        kappa_total: OrbitalRotation::from_orthogonal(&u_total)?,
        rotation: u_total,
        integrals: working,
        converged: converged && !line_search_failed,
        line_search_failed,
    })
}
