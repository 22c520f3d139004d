use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use spinstate::ansatz::{AnsatzFlavor, AnsatzSpec, Tying};
use spinstate_cli::{commands, exit, exit_code, RunConfig};

#[derive(Parser)]
#[command(name = "spinstate", version, about = "State-averaged, orbital-optimized UCC-VQE spin-state energetics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the configured spin states and write reports.
    Run {
        /// Flat `key = value` configuration file.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Override one key, e.g. `--set max_steps=2000`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        fcidump: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact diagonalization per spin state.
    Exact {
        fcidump: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        spins: Vec<usize>,
        /// Levels listed per sector.
        #[arg(long, default_value_t = 5)]
        roots: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entropy diagnostics of a saved state.
    Diagnostics {
        state: PathBuf,
        #[arg(long, default_value = "state")]
        label: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the mutual-information matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generator and parameter counts of an ansatz.
    Count {
        #[arg(long, default_value = "kupccgsd")]
        ansatz: AnsatzFlavor,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(short = 'm', long)]
        orbitals: usize,
        /// Electrons; only the UCCSD occupied/virtual split depends on it.
        /// Defaults to one per orbital.
        #[arg(short = 'n', long)]
        electrons: Option<usize>,
        #[arg(long, default_value = "independent")]
        tying: Tying,
        #[arg(long)]
        spin_adapted_singles: bool,
    },
    /// Convert a trace between CSV and JSON (direction from the input extension).
    ConvertTraces { input: PathBuf, output: PathBuf },
}

fn emit(json: String, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, overrides, fcidump, output } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::from_file(path)?,
                None => RunConfig::default(),
            };
            for o in &overrides {
                cfg.apply_assignment(o).with_context(|| format!("--set {o}"))?;
            }
            if let Some(f) = fcidump {
                cfg.fcidump = f;
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            let out = spinstate_cli::run(&cfg)?;
            let r = &out.report;
            for s in &r.states {
                eprintln!("{:>2} (S={}) E = {:.10} Eh  <S^2> = {:.6}", s.label, s.spin, s.energy_hartree, s.spin_squared);
            }
            for rel in &r.relative_energies {
                eprintln!("E_{} = {:.4} kcal/mol", rel.label, rel.kcal_per_mol);
            }
            eprintln!("report written to {}", cfg.output.join("report.json").display());
            Ok(if out.converged() { exit::CONVERGED } else { exit::NOT_CONVERGED })
        }
        Command::Exact { fcidump, spins, roots, output } => {
            let report = commands::exact(&fcidump, &spins, roots)?;
            emit(serde_json::to_string_pretty(&report)?, output.as_ref())?;
            Ok(exit::CONVERGED)
        }
        Command::Diagnostics { state, label, output, csv } => {
            let report = commands::diagnostics(&state, &label)?;
            if let Some(path) = csv {
                std::fs::write(&path, report.mutual_information_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            emit(serde_json::to_string_pretty(&report)?, output.as_ref())?;
            Ok(exit::CONVERGED)
        }
        Command::Count { ansatz, k, orbitals, electrons, tying, spin_adapted_singles } => {
            let n = electrons.unwrap_or(orbitals);
            let spec = AnsatzSpec { flavor: ansatz, k, spin_adapted_singles, tying };
            let c = commands::count(&spec, orbitals, n.div_ceil(2), n / 2)?;
            emit(serde_json::to_string_pretty(&c)?, None)?;
            Ok(exit::CONVERGED)
        }
        Command::ConvertTraces { input, output } => {
            commands::convert_traces(&input, &output)?;
            Ok(exit::CONVERGED)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
