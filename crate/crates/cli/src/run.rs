//! The `run` workflow: integrals in, optimized spin states and reports out.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use spinstate::ansatz::{build_reference_t0, build_reference_t1, compile_ansatz, ReferenceState};
use spinstate::integrals::parse_fcidump;
use spinstate::oracle::{casci_energy, SPARSE_QUBIT_CAP};
use spinstate::par;
use spinstate::scf::{run_oo_vqe, OoProblem, OoResult};
use spinstate::statevector::{occupation_string, write_snapshot, Precision, StateVector};
use spinstate::vqe::TargetState;

use crate::config::{InitialState, RunConfig};
use crate::report::{
    relative_to_quintet, spin_label, AnsatzInfo, ReferenceKet, RotationReport, RunReport, StateReport, SystemInfo,
    UNBALANCED_ACTIVE_SPACE_NOTE,
};

/// Everything a run produces, before anything touches the disk.
pub struct RunOutput {
    pub report: RunReport,
    pub vqe_trace_csv: String,
    pub macro_trace_csv: String,
    /// `(spin, final state)` per target.
    pub states: Vec<(usize, StateVector<f64>)>,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.report.converged
    }

    pub fn report_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.report)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn build_reference(cfg: &RunConfig, n_orb: usize, n_electrons: usize, spin: usize) -> spinstate::Result<ReferenceState> {
    match cfg.initial_state {
        InitialState::T0 => build_reference_t0(n_orb, n_electrons, spin),
        InitialState::T1 => build_reference_t1(n_orb, n_electrons, spin),
    }
}

fn reference_kets(r: &ReferenceState) -> Vec<ReferenceKet> {
    r.kets
        .iter()
        .map(|&(idx, amp)| ReferenceKet { occupation: occupation_string(idx, r.n_qubits), amplitude: amp.re })
        .collect()
}

/// Runs the configured optimization without writing any files.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    par::set_deterministic_reductions(cfg.deterministic);
    let text = fs::read_to_string(&cfg.fcidump).with_context(|| format!("reading {}", cfg.fcidump.display()))?;
    let ints = parse_fcidump(&text).with_context(|| format!("parsing {}", cfg.fcidump.display()))?;
    let n_electrons = ints.n_electrons();
    let weights = cfg.normalized_weights();
    let targets = cfg
        .spins
        .iter()
        .zip(&weights)
        .map(|(&spin, &weight)| Ok(TargetState { reference: build_reference(cfg, ints.n_orb, n_electrons, spin)?, weight }))
        .collect::<spinstate::Result<Vec<_>>>()?;
    // Occupied/virtual splits (UCCSD) follow the first target's reference.
    let first = &targets[0].reference;
    let program = compile_ansatz(&cfg.ansatz_spec(), ints.n_orb, first.n_alpha, first.n_beta)?;
    let problem = OoProblem {
        states: targets.clone(),
        program,
        tolerance: cfg.tolerance,
        window: cfg.window,
        max_steps: cfg.max_steps,
    };
    let theta0 = cfg.theta_init().build(problem.program.n_parameters());
    let (vqe_options, oo) = (cfg.vqe_options(), cfg.oo_options());
    let result: OoResult = match cfg.precision {
        Precision::F32 => run_oo_vqe::<f32>(&ints, &problem, &vqe_options, &oo, &theta0)?,
        Precision::F64 => run_oo_vqe::<f64>(&ints, &problem, &vqe_options, &oo, &theta0)?,
    };

    let exact = cfg.compare_exact && ints.n_qubits() <= SPARSE_QUBIT_CAP;
    let mut states = Vec::new();
    for (s, t) in result.states.iter().zip(&targets) {
        let exact_energy = if exact { Some(casci_energy(&ints, n_electrons, s.spin)?) } else { None };
        states.push(StateReport {
            label: spin_label(s.spin),
            spin: s.spin,
            weight: s.weight,
            energy_hartree: s.energy,
            number: s.number,
            spin_z: s.spin_z,
            spin_squared: s.spin_squared,
            reference: reference_kets(&t.reference),
            exact_energy_hartree: exact_energy,
            error_hartree: exact_energy.map(|e| s.energy - e),
        });
    }
    let energies: Vec<(usize, f64)> = result.states.iter().map(|s| (s.spin, s.energy)).collect();
    let report = RunReport {
        config: cfg.clone(),
        system: SystemInfo {
            n_orb: ints.n_orb,
            n_electrons,
            n_qubits: ints.n_qubits(),
            core_energy: ints.core_energy,
        },
        ansatz: AnsatzInfo {
            n_generators: problem.program.n_generators(),
            n_parameters: problem.program.n_parameters(),
        },
        converged: result.converged,
        line_search_failed: result.line_search_failed,
        vqe_steps: result.vqe_trace.rows.len(),
        macro_iterations: result.macro_trace.rows.len(),
        e_avg_hartree: result.e_avg,
        states,
        relative_energies: relative_to_quintet(&energies),
        diagnostics: result.states.iter().map(|s| s.diagnostics.clone()).collect(),
        diagnostics_note: (n_electrons != ints.n_orb).then(|| UNBALANCED_ACTIVE_SPACE_NOTE.to_string()),
        orbital_rotation: RotationReport {
            kappa: result.kappa_total.params().to_vec(),
            kappa_norm: result.kappa_total.norm(),
            rotation: result.rotation.transpose().as_slice().to_vec(),
        },
    };
    Ok(RunOutput {
        report,
        vqe_trace_csv: result.vqe_trace.to_csv(),
        macro_trace_csv: result.macro_trace.to_csv(),
        states: result.states.iter().map(|s| (s.spin, s.state.clone())).collect(),
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes `report.json`, `config.txt`, trace CSVs and per-state files.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("report.json"), &out.report_json()?)?;
    write(&dir.join("config.txt"), &cfg.to_text())?;
    write(&dir.join("vqe_trace.csv"), &out.vqe_trace_csv)?;
    if cfg.orbital_optimization {
        write(&dir.join("macro_trace.csv"), &out.macro_trace_csv)?;
    }
    for (s, d) in out.report.states.iter().zip(&out.report.diagnostics) {
        write(&dir.join(format!("mutual_information_S{}.csv", s.spin)), &d.mutual_information_csv())?;
    }
    if cfg.write_states {
        for (spin, state) in &out.states {
            let path = dir.join(format!("state_S{spin}.bin"));
            let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
            write_snapshot(state, std::io::BufWriter::new(file))?;
        }
    }
    Ok(())
}

/// [`execute`] followed by [`write_outputs`] into `cfg.output`. A run that
/// aborts on a non-finite energy still leaves its partial trace behind.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match execute(cfg) {
        Ok(out) => {
            write_outputs(cfg, &out, &cfg.output)?;
            Ok(out)
        }
        Err(err) => {
            if let Some(spinstate::Error::NonFinite { trace, .. }) = err.downcast_ref::<spinstate::Error>() {
                let mut csv = String::from("step,E_avg\n");
                for (i, e) in trace.iter().enumerate() {
                    csv.push_str(&format!("{i},{e}\n"));
                }
                // Best effort: the abort itself is the error worth reporting.
                let _ = fs::create_dir_all(&cfg.output).and_then(|_| fs::write(cfg.output.join("nan_trace.csv"), csv));
            }
            Err(err)
        }
    }
}
