//! JSON report types. Field names are part of the output contract.

use serde::Serialize;
use spinstate::diagnostics::DiagnosticsReport;
use spinstate::HARTREE_TO_KCAL_PER_MOL;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct SystemInfo {
    pub n_orb: usize,
    pub n_electrons: usize,
    pub n_qubits: usize,
    pub core_energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzInfo {
    pub n_generators: usize,
    pub n_parameters: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceKet {
    /// Occupations, qubit 0 first; qubits alternate α, β per orbital.
    pub occupation: String,
    pub amplitude: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub label: String,
    pub spin: usize,
    pub weight: f64,
    pub energy_hartree: f64,
    pub number: f64,
    pub spin_z: f64,
    pub spin_squared: f64,
    pub reference: Vec<ReferenceKet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_energy_hartree: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_hartree: Option<f64>,
}

/// `E_{Q-X} = E_X − E_Q`: positive when the quintet lies below state `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeEnergy {
    pub label: String,
    pub spin: usize,
    pub hartree: f64,
    pub kcal_per_mol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationReport {
    /// Strict upper triangle of the accumulated generator, row by row.
    pub kappa: Vec<f64>,
    pub kappa_norm: f64,
    /// Accumulated orbital rotation, row-major.
    pub rotation: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub system: SystemInfo,
    pub ansatz: AnsatzInfo,
    pub converged: bool,
    pub line_search_failed: bool,
    pub vqe_steps: usize,
    pub macro_iterations: usize,
    pub e_avg_hartree: f64,
    pub states: Vec<StateReport>,
    pub relative_energies: Vec<RelativeEnergy>,
    pub diagnostics: Vec<DiagnosticsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics_note: Option<String>,
    pub orbital_rotation: RotationReport,
}

/// Single-letter spin label: S, T, Q for 0, 1, 2.
pub fn spin_label(spin: usize) -> String {
    match spin {
        0 => "S".into(),
        1 => "T".into(),
        2 => "Q".into(),
        s => format!("2S+1={}", 2 * s + 1),
    }
}

/// Energies relative to the quintet; empty when no quintet was computed.
pub fn relative_to_quintet(energies: &[(usize, f64)]) -> Vec<RelativeEnergy> {
    let Some(&(_, e_q)) = energies.iter().find(|(s, _)| *s == 2) else {
        return Vec::new();
    };
    energies
        .iter()
        .filter(|(s, _)| *s != 2)
        .map(|&(spin, e)| {
            let hartree = e - e_q;
            RelativeEnergy {
                label: format!("Q-{}", spin_label(spin)),
                spin,
                hartree,
                kcal_per_mol: hartree * HARTREE_TO_KCAL_PER_MOL,
            }
        })
        .collect()
}

pub const UNBALANCED_ACTIVE_SPACE_NOTE: &str = "Z_s1 is a weaker multi-reference indicator when the active space \
    holds a different number of electrons than orbitals; the values are reported uncorrected.";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_energy_sign_and_units() {
        let rel = relative_to_quintet(&[(0, -1.0), (1, -1.02), (2, -1.05)]);
        assert_eq!(rel.len(), 2);
        assert_eq!(rel[0].label, "Q-S");
        assert!((rel[0].hartree - 0.05).abs() < 1e-15);
        assert!((rel[0].kcal_per_mol - 0.05 * 627.5094740631).abs() < 1e-9);
        assert!(rel[0].kcal_per_mol > 0.0);
        assert!(relative_to_quintet(&[(0, -1.0)]).is_empty());
    }
}
