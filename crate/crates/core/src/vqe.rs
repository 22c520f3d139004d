//! State-averaged VQE: objective, adjoint gradient, ADAM with a polynomial
//! learning-rate schedule, and per-step traces.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzProgram, ReferenceState};
use crate::mapping::{build_spin_observables, PauliSum};
use crate::par;
use crate::statevector::{Real, SparseOperator, StateVector};
use crate::{Error, Result};

/// Piecewise learning rate: constant `initial` until `boundary`, then a
/// polynomial decay of degree `power` over `transition` steps down to `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub initial: f64,
    pub end: f64,
    pub boundary: u64,
    pub transition: u64,
    pub power: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { initial: 1e-2, end: 1e-3, boundary: 35_000, transition: 10_000, power: 2.0 }
    }
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial > self.end && self.end > 0.0 && self.transition > 0 && self.power >= 1.0;
        if !ok {
            return Err(Error::Numerical(format!("invalid learning-rate schedule {self:?}")));
        }
        Ok(())
    }
}

pub fn schedule_rate(t: u64, p: &ScheduleParams) -> f64 {
    if t < p.boundary {
        p.initial
    } else if t < p.boundary + p.transition {
        let frac = 1.0 - (t - p.boundary) as f64 / p.transition as f64;
        (p.initial - p.end) * frac.powf(p.power) + p.end
    } else {
        p.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// ADAM moments; the step counter starts at 1 on the first update.
#[derive(Clone, Debug)]
pub struct Adam {
    params: AdamParams,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(params: AdamParams, n: usize) -> Self {
        Self { params, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) {
        let AdamParams { beta1, beta2, eps } = self.params;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grad[i];
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ThetaInit {
    Zeros,
    /// Uniform in `[−1e-2, 1e-2]`.
    Uniform { seed: u64 },
}

impl ThetaInit {
    pub fn build(&self, n: usize) -> Vec<f64> {
        match *self {
            ThetaInit::Zeros => vec![0.0; n],
            ThetaInit::Uniform { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| rng.gen_range(-1e-2..=1e-2)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetState {
    pub reference: ReferenceState,
    pub weight: f64,
}

/// Several references driven by one shared circuit.
#[derive(Clone, Debug)]
pub struct SaVqeProblem {
    pub hamiltonian: PauliSum,
    pub states: Vec<TargetState>,
    pub program: AnsatzProgram,
    /// Convergence threshold on `|ΔE_avg|` between consecutive steps.
    pub tolerance: f64,
    /// Consecutive steps under `tolerance` required to stop.
    pub window: usize,
    pub max_steps: usize,
}

impl SaVqeProblem {
    pub fn new(hamiltonian: PauliSum, states: Vec<TargetState>, program: AnsatzProgram) -> Self {
        Self { hamiltonian, states, program, tolerance: 1e-7, window: 50, max_steps: 50_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Dimension("no target states".into()));
        }
        let n = self.program.n_qubits();
        if self.hamiltonian.n_qubits() != n {
            return Err(Error::Dimension(format!(
                "Hamiltonian on {} qubits, circuit on {n}",
                self.hamiltonian.n_qubits()
            )));
        }
        let total: f64 = self.states.iter().map(|s| s.weight).sum();
        if self.states.iter().any(|s| !(0.0..=1.0).contains(&s.weight)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical("state weights must lie in [0, 1] and sum to 1".into()));
        }
        if self.tolerance <= 0.0 || self.window == 0 {
            return Err(Error::Numerical("convergence tolerance and window must be positive".into()));
        }
        let refs = self
            .states
            .iter()
            .map(|s| {
                if s.reference.n_qubits != n {
                    return Err(Error::Dimension("reference and circuit sizes differ".into()));
                }
                s.reference.to_state::<f64>()
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..refs.len() {
            for j in i + 1..refs.len() {
                let o = refs[i].inner_product(&refs[j])?.norm();
                if o > 1e-12 {
                    return Err(Error::Numerical(format!("references {i} and {j} overlap by {o:e}")));
                }
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.weight).collect()
    }
}

/// Per-state quantities at one parameter point.
#[derive(Clone, Debug)]
pub struct Evaluation<T: Real> {
    pub e_avg: f64,
    pub energies: Vec<f64>,
    /// Present when requested.
    pub gradient: Option<Vec<f64>>,
    pub states: Vec<StateVector<T>>,
}

/// Precomputed operators for repeated evaluation of one problem.
pub struct Evaluator<'a, T: Real> {
    problem: &'a SaVqeProblem,
    h: SparseOperator<T>,
    references: Vec<StateVector<T>>,
    s2: SparseOperator<T>,
    sz: SparseOperator<T>,
    n: SparseOperator<T>,
}

impl<'a, T: Real> Evaluator<'a, T> {
    pub fn new(problem: &'a SaVqeProblem) -> Result<Self> {
        problem.validate()?;
        let m = problem.program.n_qubits() / 2;
        let obs = build_spin_observables(m);
        let references =
            problem.states.iter().map(|s| s.reference.to_state::<T>()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem,
            h: SparseOperator::from_pauli_sum(&problem.hamiltonian),
            references,
            s2: SparseOperator::from_pauli_sum(&obs.s2),
            sz: SparseOperator::from_pauli_sum(&obs.sz),
            n: SparseOperator::from_pauli_sum(&obs.n),
        })
    }

    /// Forward pass for one state, and the adjoint backward pass when
    /// `with_gradient` is set. Returns `(E, dE/dθ per generator, ψ(θ))`.
    fn state_pass(
        &self,
        reference: &StateVector<T>,
        angles: &[f64],
        with_gradient: bool,
    ) -> Result<(f64, Option<Vec<f64>>, StateVector<T>)> {
        let gens = self.problem.program.generators();
        let mut psi = reference.clone();
        for (g, &a) in gens.iter().zip(angles) {
            g.apply_exponential(&mut psi, a)?;
        }
        let mut lambda = self.h.apply(&psi)?;
        let energy = psi.inner_product(&lambda)?.re;
        if !with_gradient {
            return Ok((energy, None, psi));
        }
        let out_state = psi.clone();
        let mut grad = vec![0.0; gens.len()];
        for i in (0..gens.len()).rev() {
            grad[i] = 2.0 * gens[i].matrix_element(&lambda, &psi)?.re;
            if angles[i] != 0.0 {
                gens[i].apply_exponential(&mut psi, -angles[i])?;
                gens[i].apply_exponential(&mut lambda, -angles[i])?;
            }
        }
        Ok((energy, Some(grad), out_state))
    }

    pub fn evaluate(&self, theta: &[f64], with_gradient: bool) -> Result<Evaluation<T>> {
        let program = &self.problem.program;
        let angles = program.generator_angles(theta)?;
        let passes = par::map_vec(&self.references, |r| self.state_pass(r, &angles, with_gradient));
        let weights = self.problem.weights();
        let mut e_avg = 0.0;
        let mut energies = Vec::with_capacity(passes.len());
        let mut gradient = with_gradient.then(|| vec![0.0; program.n_parameters()]);
        let mut states = Vec::with_capacity(passes.len());
        for (pass, &w) in passes.into_iter().zip(&weights) {
            let (e, g, psi) = pass?;
            e_avg += w * e;
            energies.push(e);
            if let (Some(total), Some(g)) = (gradient.as_mut(), g) {
                for (t, gs) in total.iter_mut().zip(program.fold_to_slots(&g)) {
                    *t += w * gs;
                }
            }
            states.push(psi);
        }
        Ok(Evaluation { e_avg, energies, gradient, states })
    }

    /// `(⟨N⟩, ⟨S_z⟩, ⟨S²⟩)` of a state.
    pub fn quantum_numbers(&self, psi: &StateVector<T>) -> Result<(f64, f64, f64)> {
        Ok((self.n.expectation(psi)?, self.sz.expectation(psi)?, self.s2.expectation(psi)?))
    }
}

/// `(E_avg, per-state energies)`.
pub fn sa_energy(theta: &[f64], problem: &SaVqeProblem) -> Result<(f64, Vec<f64>)> {
    let ev = Evaluator::<f64>::new(problem)?.evaluate(theta, false)?;
    Ok((ev.e_avg, ev.energies))
}

/// `∂E_avg/∂θ` by reverse accumulation through the circuit.
pub fn sa_gradient(theta: &[f64], problem: &SaVqeProblem) -> Result<Vec<f64>> {
    let ev = Evaluator::<f64>::new(problem)?.evaluate(theta, true)?;
    Ok(ev.gradient.expect("gradient requested"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub lr: f64,
    pub e_avg: f64,
    pub energies: Vec<f64>,
    pub spin_squared: Vec<f64>,
    pub number: Vec<f64>,
    pub spin_z: Vec<f64>,
    /// Largest `|⟨ψ_i|ψ_j⟩|` over state pairs.
    pub max_overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeTrace {
    /// Total spin of each state, labelling the per-state columns.
    pub spins: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

impl VqeTrace {
    pub fn header(&self) -> String {
        let mut cols = vec!["step".to_string(), "lr".into(), "E_avg".into()];
        cols.extend(self.spins.iter().map(|s| format!("E_S{s}")));
        cols.extend(self.spins.iter().map(|s| format!("S2_S{s}")));
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.step, r.lr, r.e_avg);
            for v in r.energies.iter().chain(&r.spin_squared) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    /// Per-state energies at the returned parameters.
    pub energies: Vec<f64>,
    pub e_avg: f64,
    /// Parameters with the lowest `E_avg` seen.
    pub theta: Vec<f64>,
    pub trace: VqeTrace,
    pub converged: bool,
    pub steps: usize,
    /// Optimized states at `theta`.
    pub states: Vec<StateVector<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct VqeOptions {
    pub schedule: ScheduleParams,
    pub adam: AdamParams,
    /// Added to every recorded step number, for traces spanning several runs.
    pub step_offset: usize,
}


fn max_overlap<T: Real>(states: &[StateVector<T>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            worst = worst.max(states[i].inner_product(&states[j])?.norm());
        }
    }
    Ok(worst)
}

/// Runs ADAM from `theta0` until `|ΔE_avg| ≤ tolerance` for `window`
/// consecutive steps or `max_steps` evaluations.
pub fn run_vqe<T: Real>(problem: &SaVqeProblem, options: &VqeOptions, theta0: &[f64]) -> Result<VqeResult> {
    options.schedule.validate()?;
    let ev = Evaluator::<T>::new(problem)?;
    problem.program.check_parameters(theta0)?;
    let mut theta = theta0.to_vec();
    let mut adam = Adam::new(options.adam, theta.len());
    let spins: Vec<usize> = problem.states.iter().map(|s| s.reference.spin).collect();
    let mut trace = VqeTrace { spins, rows: Vec::new() };
    // (E_avg, θ, per-state energies, states) at the lowest E_avg seen.
    #[allow(clippy::type_complexity)]
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<StateVector<T>>)> = None;
    let mut prev: Option<f64> = None;
    let mut quiet = 0;
    let mut converged = false;
    let mut steps = 0;
    for step in 0..problem.max_steps {
        let lr = schedule_rate(step as u64, &options.schedule);
        let e = ev.evaluate(&theta, true)?;
        steps = step + 1;
        let global = step + options.step_offset;
        let grad = e.gradient.as_ref().expect("gradient requested");
        if !e.e_avg.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            let mut energies: Vec<f64> = trace.rows.iter().map(|r| r.e_avg).collect();
            energies.push(e.e_avg);
            return Err(Error::NonFinite { step: global, trace: energies });
        }
        let mut row = TraceRow {
            step: global,
            lr,
            e_avg: e.e_avg,
            energies: e.energies.clone(),
            spin_squared: Vec::new(),
            number: Vec::new(),
            spin_z: Vec::new(),
            max_overlap: max_overlap(&e.states)?,
        };
        for psi in &e.states {
            let (n, sz, s2) = ev.quantum_numbers(psi)?;
            row.number.push(n);
            row.spin_z.push(sz);
            row.spin_squared.push(s2);
        }
        trace.rows.push(row);
        if best.as_ref().is_none_or(|b| e.e_avg < b.0) {
            best = Some((e.e_avg, theta.clone(), e.energies.clone(), e.states.clone()));
        }
        if let Some(p) = prev {
            if (e.e_avg - p).abs() <= problem.tolerance {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        prev = Some(e.e_avg);
        if quiet >= problem.window {
            converged = true;
            break;
        }
        adam.step(&mut theta, grad, lr);
    }
    let (e_avg, theta, energies, states) = best.ok_or_else(|| Error::Numerical("max_steps is zero".into()))?;
    Ok(VqeResult {
        energies,
        e_avg,
        theta,
        trace,
        converged,
        steps,
        states: states.iter().map(|s| s.cast()).collect(),
    })
}

/// Pairwise overlaps of the references after the circuit; used by tests and
/// reports.
pub fn overlap_matrix(states: &[StateVector<f64>]) -> Result<Vec<Vec<Complex64>>> {
    states.iter().map(|a| states.iter().map(|b| a.inner_product(b)).collect()).collect()
}
