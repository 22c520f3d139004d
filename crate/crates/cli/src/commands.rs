//! The smaller subcommands: exact spectra, state diagnostics, operator
//! counts and trace format conversion.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use spinstate::ansatz::{counts, AnsatzSpec};
use spinstate::diagnostics::{diagnostics_report, DiagnosticsReport};
use spinstate::integrals::parse_fcidump;
use spinstate::oracle::{casci_energy, sector_spectrum, Solver};
use spinstate::statevector::read_snapshot;

use crate::report::{relative_to_quintet, spin_label, RelativeEnergy};

#[derive(Clone, Debug, Serialize)]
pub struct ExactState {
    pub label: String,
    pub spin: usize,
    pub energy_hartree: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSector {
    pub two_sz: i64,
    pub eigenvalues: Vec<f64>,
    pub spin_squared: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub n_orb: usize,
    pub n_electrons: usize,
    pub states: Vec<ExactState>,
    pub relative_energies: Vec<RelativeEnergy>,
    pub sectors: Vec<ExactSector>,
}

/// Lowest energy per requested spin, plus the lowest `roots` levels of each
/// `S_z = S` sector.
pub fn exact(fcidump: &Path, spins: &[usize], roots: usize) -> Result<ExactReport> {
    let text = fs::read_to_string(fcidump).with_context(|| format!("reading {}", fcidump.display()))?;
    let ints = parse_fcidump(&text)?;
    let n = ints.n_electrons();
    let mut states = Vec::new();
    let mut sectors = Vec::new();
    for &spin in spins {
        if 2 * spin > n || (n - 2 * spin) % 2 == 1 {
            return Err(spinstate::Error::Infeasible(format!("S = {spin} with {n} electrons")).into());
        }
        states.push(ExactState { label: spin_label(spin), spin, energy_hartree: casci_energy(&ints, n, spin)? });
        let solver = if ints.n_qubits() <= spinstate::oracle::DENSE_QUBIT_CAP {
            Solver::Dense
        } else {
            Solver::Lanczos { n_roots: roots.max(1) }
        };
        let spec = sector_spectrum(&ints, n, 2 * spin as i64, solver)?;
        let keep = roots.min(spec.eigenvalues.len());
        sectors.push(ExactSector {
            two_sz: spec.two_sz,
            eigenvalues: spec.eigenvalues[..keep].to_vec(),
            spin_squared: spec.spin_squared[..keep].to_vec(),
        });
    }
    let energies: Vec<(usize, f64)> = states.iter().map(|s| (s.spin, s.energy_hartree)).collect();
    Ok(ExactReport { n_orb: ints.n_orb, n_electrons: n, relative_energies: relative_to_quintet(&energies), states, sectors })
}

/// Entropy diagnostics of a saved state snapshot.
pub fn diagnostics(state_path: &Path, label: &str) -> Result<DiagnosticsReport> {
    let file = fs::File::open(state_path).with_context(|| format!("opening {}", state_path.display()))?;
    let state = read_snapshot(std::io::BufReader::new(file))?.to_f64();
    Ok(diagnostics_report(&state, label)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OperatorCount {
    pub n_orb: usize,
    pub generators: usize,
    pub parameters: usize,
}

pub fn count(spec: &AnsatzSpec, n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<OperatorCount> {
    let (generators, parameters) = counts(spec, n_orb, n_alpha, n_beta)?;
    Ok(OperatorCount { n_orb, generators, parameters })
}

fn csv_to_json(text: &str) -> Result<String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().map(|h| h.split(',').map(str::trim).collect()).unwrap_or_default();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            bail!("row {} has {} cells, header has {}", i + 2, cells.len(), header.len());
        }
        let mut obj = Map::new();
        for (k, v) in header.iter().zip(cells) {
            let value = if let Ok(i) = v.parse::<i64>() {
                Value::from(i)
            } else if let Some(x) = v.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                Value::Number(x)
            } else {
                Value::String(v.to_string())
            };
            obj.insert(k.to_string(), value);
        }
        rows.push(Value::Object(obj));
    }
    let mut s = serde_json::to_string_pretty(&Value::Array(rows))?;
    s.push('\n');
    Ok(s)
}

fn json_to_csv(text: &str) -> Result<String> {
    let rows: Vec<Map<String, Value>> = serde_json::from_str(text).context("expected a JSON array of objects")?;
    let Some(first) = rows.first() else {
        return Ok(String::new());
    };
    let header: Vec<String> = first.keys().cloned().collect();
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let cells = header
            .iter()
            .map(|k| match row.get(k) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(v @ Value::Number(_)) => Ok(v.to_string()),
                _ => bail!("row {i} lacks a scalar {k:?}"),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// CSV → JSON or JSON → CSV, chosen by the input extension.
pub fn convert_traces(input: &Path, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let converted = match input.extension().and_then(|e| e.to_str()) {
        Some("csv") => csv_to_json(&text)?,
        Some("json") => json_to_csv(&text)?,
        _ => bail!("cannot tell the format of {}; use a .csv or .json extension", input.display()),
    };
    fs::write(output, converted).with_context(|| format!("writing {}", output.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_conversion_round_trip() {
        let csv = "step,lr,E_avg\n0,0.01,-1.5\n1,0.01,-1.25e-3\n";
        let json = csv_to_json(csv).unwrap();
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[1]["step"], Value::from(1));
        assert_eq!(v[1]["E_avg"].as_f64(), Some(-1.25e-3));
        let back = json_to_csv(&json).unwrap();
        assert_eq!(back.lines().next(), Some("step,lr,E_avg"));
        let again: Value = serde_json::from_str(&csv_to_json(&back).unwrap()).unwrap();
        assert_eq!(again, v);
    }

    #[test]
    fn ragged_csv_is_rejected() {
        assert!(csv_to_json("a,b\n1\n").is_err());
    }
}
