//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default, so a
//! file only needs the integral path; `--set key=value` overrides apply after
//! the file in the order given.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use spinstate::ansatz::{AnsatzFlavor, AnsatzSpec, Tying};
use spinstate::scf::OoOptions;
use spinstate::statevector::Precision;
use spinstate::vqe::{AdamParams, ScheduleParams, ThetaInit, VqeOptions};

/// Which reference family seeds the spin states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InitialState {
    /// One high-spin determinant per state.
    T0,
    /// Like `T0`, except the triplet is the two-determinant combination.
    T1,
}

impl FromStr for InitialState {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T0" => Ok(Self::T0),
            "T1" => Ok(Self::T1),
            _ => bail!("initial_state must be T0 or T1, got {s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub fcidump: PathBuf,
    /// Not echoed into reports, so identical runs into different directories
    /// produce identical reports.
    #[serde(skip)]
    pub output: PathBuf,
    pub ansatz: AnsatzFlavor,
    pub k: usize,
    pub spin_adapted_singles: bool,
    pub tying: Tying,
    pub initial_state: InitialState,
    pub spins: Vec<usize>,
    /// Normalized on use; empty means equal weights.
    pub weights: Vec<f64>,
    pub lr_initial: f64,
    pub lr_end: f64,
    pub lr_boundary: u64,
    pub lr_transition: u64,
    pub lr_power: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub tolerance: f64,
    pub window: usize,
    pub max_steps: usize,
    pub orbital_optimization: bool,
    pub max_macros: usize,
    pub orbital_step: f64,
    pub max_halvings: usize,
    pub orbital_energy_tolerance: f64,
    pub orbital_gradient_tolerance: f64,
    pub precision: Precision,
    pub deterministic: bool,
    /// `None` starts from zero angles, otherwise small uniform angles.
    pub seed: Option<u64>,
    /// Also solve the exact problem for each spin and report the gap.
    pub compare_exact: bool,
    pub write_states: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let schedule = ScheduleParams::default();
        let adam = AdamParams::default();
        let oo = OoOptions::default();
        Self {
            fcidump: PathBuf::new(),
            output: PathBuf::from("spinstate-out"),
            ansatz: AnsatzFlavor::KUpCCGSD,
            k: 1,
            spin_adapted_singles: false,
            tying: Tying::Independent,
            initial_state: InitialState::T0,
            spins: vec![0, 1, 2],
            weights: Vec::new(),
            lr_initial: schedule.initial,
            lr_end: schedule.end,
            lr_boundary: schedule.boundary,
            lr_transition: schedule.transition,
            lr_power: schedule.power,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            tolerance: 1e-7,
            window: 50,
            max_steps: 50_000,
            orbital_optimization: true,
            max_macros: oo.max_macros,
            orbital_step: oo.step,
            max_halvings: oo.max_halvings,
            orbital_energy_tolerance: oo.energy_tolerance,
            orbital_gradient_tolerance: oo.gradient_tolerance,
            precision: Precision::F64,
            deterministic: true,
            seed: None,
            compare_exact: false,
            write_states: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("{key}: expected a boolean, got {value:?}"),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        // Relative integral paths are resolved against the config file.
        if cfg.fcidump.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.fcidump = dir.join(&cfg.fcidump);
            }
        }
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.apply_assignment(line).with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(())
    }

    /// Applies one `key=value` pair.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key = value, got {assignment:?}"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "fcidump" => self.fcidump = PathBuf::from(value),
            "output" => self.output = PathBuf::from(value),
            "ansatz" => self.ansatz = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "spin_adapted_singles" => self.spin_adapted_singles = parse_bool(key, value)?,
            "tying" => self.tying = parse(key, value)?,
            "initial_state" => self.initial_state = parse(key, value)?,
            "spins" => self.spins = parse_list(key, value)?,
            "weights" => self.weights = parse_list(key, value)?,
            "lr_initial" => self.lr_initial = parse(key, value)?,
            "lr_end" => self.lr_end = parse(key, value)?,
            "lr_boundary" => self.lr_boundary = parse(key, value)?,
            "lr_transition" => self.lr_transition = parse(key, value)?,
            "lr_power" => self.lr_power = parse(key, value)?,
            "adam_beta1" => self.adam_beta1 = parse(key, value)?,
            "adam_beta2" => self.adam_beta2 = parse(key, value)?,
            "adam_eps" => self.adam_eps = parse(key, value)?,
            "tolerance" => self.tolerance = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "orbital_optimization" => self.orbital_optimization = parse_bool(key, value)?,
            "max_macros" => self.max_macros = parse(key, value)?,
            "orbital_step" => self.orbital_step = parse(key, value)?,
            "max_halvings" => self.max_halvings = parse(key, value)?,
            "orbital_energy_tolerance" => self.orbital_energy_tolerance = parse(key, value)?,
            "orbital_gradient_tolerance" => self.orbital_gradient_tolerance = parse(key, value)?,
            "precision" => {
                self.precision = match value.to_ascii_lowercase().as_str() {
                    "f32" | "single" => Precision::F32,
                    "f64" | "double" => Precision::F64,
                    _ => bail!("precision must be f32 or f64, got {value:?}"),
                }
            }
            "deterministic" => self.deterministic = parse_bool(key, value)?,
            "seed" => {
                self.seed = match value.to_ascii_lowercase().as_str() {
                    "none" | "" => None,
                    _ => Some(parse(key, value)?),
                }
            }
            "compare_exact" => self.compare_exact = parse_bool(key, value)?,
            "write_states" => self.write_states = parse_bool(key, value)?,
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.spins.is_empty() {
            bail!("spins must list at least one spin state");
        }
        let mut sorted = self.spins.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.spins.len() {
            bail!("spins must be distinct");
        }
        if !self.weights.is_empty() {
            if self.weights.len() != self.spins.len() {
                bail!("{} weights for {} spin states", self.weights.len(), self.spins.len());
            }
            if self.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) || self.weights.iter().sum::<f64>() <= 0.0 {
                bail!("weights must be non-negative with a positive sum");
            }
        }
        let tolerances = [
            ("tolerance", self.tolerance),
            ("adam_eps", self.adam_eps),
            ("orbital_step", self.orbital_step),
            ("orbital_energy_tolerance", self.orbital_energy_tolerance),
            ("orbital_gradient_tolerance", self.orbital_gradient_tolerance),
        ];
        for (name, v) in tolerances {
            if v.is_nan() || v <= 0.0 {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.window == 0 || self.max_steps == 0 {
            bail!("window and max_steps must be positive");
        }
        self.schedule().validate()?;
        self.ansatz_spec().validate()?;
        Ok(())
    }

    /// Weights normalized to sum to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            return vec![1.0 / self.spins.len() as f64; self.spins.len()];
        }
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn ansatz_spec(&self) -> AnsatzSpec {
        AnsatzSpec { flavor: self.ansatz, k: self.k, spin_adapted_singles: self.spin_adapted_singles, tying: self.tying }
    }

    pub fn schedule(&self) -> ScheduleParams {
        ScheduleParams {
            initial: self.lr_initial,
            end: self.lr_end,
            boundary: self.lr_boundary,
            transition: self.lr_transition,
            power: self.lr_power,
        }
    }

    pub fn vqe_options(&self) -> VqeOptions {
        VqeOptions {
            schedule: self.schedule(),
            adam: AdamParams { beta1: self.adam_beta1, beta2: self.adam_beta2, eps: self.adam_eps },
            step_offset: 0,
        }
    }

    pub fn oo_options(&self) -> OoOptions {
        OoOptions {
            enabled: self.orbital_optimization,
            max_macros: self.max_macros,
            step: self.orbital_step,
            max_halvings: self.max_halvings,
            energy_tolerance: self.orbital_energy_tolerance,
            gradient_tolerance: self.orbital_gradient_tolerance,
        }
    }

    pub fn theta_init(&self) -> ThetaInit {
        self.seed.map_or(ThetaInit::Zeros, |seed| ThetaInit::Uniform { seed })
    }

    /// The configuration as a config file; parsing it back yields `self`
    /// (with `fcidump` as written, so keep it absolute for portability).
    pub fn to_text(&self) -> String {
        let tying = match self.tying {
            Tying::Independent => "independent",
            Tying::SharedFirstLayerSingles => "shared-singles",
        };
        let ansatz = match self.ansatz {
            AnsatzFlavor::Uccsd => "uccsd",
            AnsatzFlavor::Uccgsd => "uccgsd",
            AnsatzFlavor::KUpCCGSD => "kupccgsd",
        };
        let precision = match self.precision {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        };
        let rows: Vec<(&str, String)> = vec![
            ("fcidump", self.fcidump.display().to_string()),
            ("output", self.output.display().to_string()),
            ("ansatz", ansatz.into()),
            ("k", self.k.to_string()),
            ("spin_adapted_singles", self.spin_adapted_singles.to_string()),
            ("tying", tying.into()),
            ("initial_state", format!("{:?}", self.initial_state)),
            ("spins", join(&self.spins)),
            ("weights", join(&self.weights)),
            ("lr_initial", format!("{:e}", self.lr_initial)),
            ("lr_end", format!("{:e}", self.lr_end)),
            ("lr_boundary", self.lr_boundary.to_string()),
            ("lr_transition", self.lr_transition.to_string()),
            ("lr_power", self.lr_power.to_string()),
            ("adam_beta1", self.adam_beta1.to_string()),
            ("adam_beta2", self.adam_beta2.to_string()),
            ("adam_eps", format!("{:e}", self.adam_eps)),
            ("tolerance", format!("{:e}", self.tolerance)),
            ("window", self.window.to_string()),
            ("max_steps", self.max_steps.to_string()),
            ("orbital_optimization", self.orbital_optimization.to_string()),
            ("max_macros", self.max_macros.to_string()),
            ("orbital_step", self.orbital_step.to_string()),
            ("max_halvings", self.max_halvings.to_string()),
            ("orbital_energy_tolerance", format!("{:e}", self.orbital_energy_tolerance)),
            ("orbital_gradient_tolerance", format!("{:e}", self.orbital_gradient_tolerance)),
            ("precision", precision.into()),
            ("deterministic", self.deterministic.to_string()),
            ("seed", self.seed.map_or("none".into(), |s| s.to_string())),
            ("compare_exact", self.compare_exact.to_string()),
            ("write_states", self.write_states.to_string()),
        ];
        rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("fcidump = h2.fcidump # comment\n\nspins = 0, 2\nweights = 1 3\nseed = 7\nprecision = f32\n")
            .unwrap();
        assert_eq!(cfg.spins, vec![0, 2]);
        assert_eq!(cfg.normalized_weights(), vec![0.25, 0.75]);
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.precision, Precision::F32);
        cfg.apply_assignment("tying=shared-singles").unwrap();
        cfg.apply_assignment("k=3").unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("fcidump = /tmp/x\nspins = 1\ninitial_state = T1\nseed = 3\norbital_optimization = off").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_assignment("unknown = 1").is_err());
        assert!(cfg.apply_assignment("k").is_err());
        assert!(cfg.apply_assignment("deterministic = maybe").is_err());
        cfg.spins.clear();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { weights: vec![1.0], ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { tolerance: 0.0, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
