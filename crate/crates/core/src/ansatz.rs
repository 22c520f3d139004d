//! Reference states and unitary coupled-cluster circuits.
//!
//! A circuit is an ordered product of generator exponentials
//! `∏_i e^{θ_{slot(i)} (ĝ_i − ĝ_i†)}`, applied first to last. Several
//! generators may share one parameter slot.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::statevector::{ExcitationGenerator, ExcitationKind, Real, StateVector};
use crate::{alpha, beta, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzFlavor {
    #[serde(rename = "uccsd")]
    Uccsd,
    #[serde(rename = "uccgsd")]
    Uccgsd,
    #[serde(rename = "kupccgsd")]
    KUpCCGSD,
}

impl std::str::FromStr for AnsatzFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "uccsd" => Ok(Self::Uccsd),
            "uccgsd" => Ok(Self::Uccgsd),
            "kupccgsd" | "upccgsd" => Ok(Self::KUpCCGSD),
            _ => Err(Error::Ansatz(format!("unknown ansatz {s:?}"))),
        }
    }
}

/// How generators are bound to parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tying {
    /// One parameter per generator.
    #[default]
    Independent,
    /// k-UpCCGSD only: in the first layer each β single reuses the parameter
    /// of the α single on the same ordered orbital pair. This removes exactly
    /// `M(M−1)` parameters, giving `(3k−1)·M(M−1)` in total. The choice of
    /// which generators to merge is a reconstruction; only the count is pinned.
    #[serde(rename = "shared-singles")]
    SharedFirstLayerSingles,
}

impl std::str::FromStr for Tying {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "independent" => Ok(Self::Independent),
            "shared-singles" | "shared-first-layer-singles" => Ok(Self::SharedFirstLayerSingles),
            _ => Err(Error::Ansatz(format!("unknown tying scheme {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub flavor: AnsatzFlavor,
    pub k: usize,
    /// Share one parameter between the α and β single on the same orbital
    /// pair in every layer. The two exponentials are adjacent and commute, so
    /// their product is a spin-free orbital rotation and `S²` is conserved.
    pub spin_adapted_singles: bool,
    pub tying: Tying,
}

impl AnsatzSpec {
    pub fn kupccgsd(k: usize) -> Self {
        Self { flavor: AnsatzFlavor::KUpCCGSD, k, spin_adapted_singles: false, tying: Tying::Independent }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Ansatz("k must be at least 1".into()));
        }
        if self.flavor != AnsatzFlavor::KUpCCGSD {
            if self.k != 1 {
                return Err(Error::Ansatz(format!("{:?} supports k = 1 only", self.flavor)));
            }
            if self.tying != Tying::Independent {
                return Err(Error::Ansatz("shared-singles tying applies to k-UpCCGSD only".into()));
            }
        }
        Ok(())
    }
}

/// Normalized superposition of determinants sharing `(n_α, n_β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceState {
    pub n_qubits: usize,
    pub kets: Vec<(usize, Complex64)>,
    /// Target total spin `S` (so `⟨S²⟩ = S(S+1)`).
    pub spin: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl ReferenceState {
    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn to_state<T: Real>(&self) -> Result<StateVector<T>> {
        StateVector::from_kets(self.n_qubits, &self.kets)
    }

    /// `⟨S²⟩` of a restricted determinant from its unpaired α and β counts.
    pub fn determinant_s2(unpaired_alpha: usize, unpaired_beta: usize) -> f64 {
        let d = unpaired_alpha as f64 - unpaired_beta as f64;
        (d * d + 2.0 * (unpaired_alpha + unpaired_beta) as f64) / 4.0
    }
}

/// Doubly occupied orbitals, singly-occupied α orbitals, and `(n_α, n_β)`
/// of the high-spin determinant for `S`.
fn high_spin_layout(n_orb: usize, n_electrons: usize, spin: usize) -> Result<(usize, usize)> {
    if n_electrons == 0 || n_electrons % 2 == 1 {
        return Err(Error::Infeasible(format!("{n_electrons} electrons; an even, nonzero count is required")));
    }
    if 2 * spin > n_electrons {
        return Err(Error::Infeasible(format!("S = {spin} needs at least {} electrons", 2 * spin)));
    }
    let doubly = (n_electrons - 2 * spin) / 2;
    let singly = 2 * spin;
    if doubly + singly > n_orb {
        return Err(Error::Infeasible(format!(
            "S = {spin} with {n_electrons} electrons needs {} orbitals, have {n_orb}",
            doubly + singly
        )));
    }
    Ok((doubly, singly))
}

/// Determinant with the lowest `N/2 − S` orbitals doubly occupied followed
/// by `2S` α-occupied orbitals.
pub fn build_reference_t0(n_orb: usize, n_electrons: usize, spin: usize) -> Result<ReferenceState> {
    let (doubly, singly) = high_spin_layout(n_orb, n_electrons, spin)?;
    let mut idx = 0usize;
    for p in 0..doubly {
        idx |= 1 << alpha(p) | 1 << beta(p);
    }
    for p in doubly..doubly + singly {
        idx |= 1 << alpha(p);
    }
    Ok(ReferenceState {
        n_qubits: 2 * n_orb,
        kets: vec![(idx, Complex64::new(1.0, 0.0))],
        spin,
        n_alpha: doubly + singly,
        n_beta: doubly,
    })
}

/// Two-determinant triplet: with `d` doubly occupied orbitals, the unpaired
/// α electrons sit on orbitals `(d+1, d+2)` and `(d, d+2)` with amplitudes
/// `+1/√2` and `−1/√2`. Singlets and quintets use [`build_reference_t0`].
pub fn build_reference_t1(n_orb: usize, n_electrons: usize, spin: usize) -> Result<ReferenceState> {
    if spin != 1 {
        return build_reference_t0(n_orb, n_electrons, spin);
    }
    let (doubly, _) = high_spin_layout(n_orb, n_electrons, spin)?;
    if doubly + 3 > n_orb {
        return Err(Error::Infeasible(format!(
            "the two-determinant triplet needs {} orbitals, have {n_orb}",
            doubly + 3
        )));
    }
    let core = (0..doubly).fold(0usize, |m, p| m | 1 << alpha(p) | 1 << beta(p));
    let d = doubly;
    let first = core | 1 << alpha(d + 1) | 1 << alpha(d + 2);
    let second = core | 1 << alpha(d) | 1 << alpha(d + 2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(ReferenceState {
        n_qubits: 2 * n_orb,
        kets: vec![(first, Complex64::new(h, 0.0)), (second, Complex64::new(-h, 0.0))],
        spin,
        n_alpha: doubly + 2,
        n_beta: doubly,
    })
}

/// Compiled circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzProgram {
    n_qubits: usize,
    generators: Vec<ExcitationGenerator>,
    layers: Vec<usize>,
    slot_map: Vec<usize>,
    n_parameters: usize,
}

impl AnsatzProgram {
    /// Assembles a program from explicit generators and slot bindings.
    pub fn from_parts(
        n_qubits: usize,
        kinds: &[ExcitationKind],
        layers: Vec<usize>,
        slot_map: Vec<usize>,
    ) -> Result<Self> {
        if kinds.len() != slot_map.len() || kinds.len() != layers.len() {
            return Err(Error::Dimension("generators, layers and slots differ in length".into()));
        }
        let n_parameters = slot_map.iter().map(|&s| s + 1).max().unwrap_or(0);
        let mut used = vec![false; n_parameters];
        slot_map.iter().for_each(|&s| used[s] = true);
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(Error::Ansatz(format!("parameter slot {s} drives no generator")));
        }
        let generators = kinds
            .iter()
            .map(|&k| ExcitationGenerator::new(k, n_qubits))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_qubits, generators, layers, slot_map, n_parameters })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    pub fn generators(&self) -> &[ExcitationGenerator] {
        &self.generators
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn slot_map(&self) -> &[usize] {
        &self.slot_map
    }

    pub fn check_parameters(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_parameters {
            return Err(Error::Dimension(format!(
                "{} parameters for a program with {}",
                theta.len(),
                self.n_parameters
            )));
        }
        Ok(())
    }

    /// Per-generator angles: `theta[slot(i)]`.
    pub fn generator_angles(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_parameters(theta)?;
        Ok(self.slot_map.iter().map(|&s| theta[s]).collect())
    }

    /// Sums per-generator partial derivatives into parameter slots.
    pub fn fold_to_slots(&self, per_generator: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_parameters];
        for (&s, &g) in self.slot_map.iter().zip(per_generator) {
            out[s] += g;
        }
        out
    }

    /// Applies the circuit in place.
    pub fn apply<T: Real>(&self, state: &mut StateVector<T>, theta: &[f64]) -> Result<()> {
        let angles = self.generator_angles(theta)?;
        for (g, &a) in self.generators.iter().zip(&angles) {
            g.apply_exponential(state, a)?;
        }
        Ok(())
    }
}

/// Returns `U(θ)|ψ⟩`.
pub fn apply_ansatz<T: Real>(state: &StateVector<T>, program: &AnsatzProgram, theta: &[f64]) -> Result<StateVector<T>> {
    let mut out = state.clone();
    program.apply(&mut out, theta)?;
    Ok(out)
}

/// Slot allocator keyed by a tie label; untied generators get fresh slots.
struct Slots {
    next: usize,
    named: HashMap<(usize, usize, usize), usize>,
    map: Vec<usize>,
}

impl Slots {
    fn new() -> Self {
        Self { next: 0, named: HashMap::new(), map: Vec::new() }
    }

    fn fresh(&mut self) {
        self.map.push(self.next);
        self.next += 1;
    }

    fn tied(&mut self, key: (usize, usize, usize)) {
        let next = &mut self.next;
        let s = *self.named.entry(key).or_insert_with(|| {
            *next += 1;
            *next - 1
        });
        self.map.push(s);
    }
}

/// Builds the generator list for a spec. `n_alpha`/`n_beta` fix the
/// occupied/virtual split of UCCSD (the lowest orbitals of each spin channel
/// are occupied); other flavors ignore them.
pub fn compile_ansatz(spec: &AnsatzSpec, n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<AnsatzProgram> {
    spec.validate()?;
    if n_orb == 0 {
        return Err(Error::Ansatz("no orbitals".into()));
    }
    let n_qubits = 2 * n_orb;
    let mut kinds = Vec::new();
    let mut layers = Vec::new();
    let mut slots = Slots::new();
    // Tie keys: (layer or usize::MAX for all layers, from orbital, to orbital).
    match spec.flavor {
        AnsatzFlavor::KUpCCGSD => {
            for layer in 0..spec.k {
                for p in 0..n_orb {
                    for q in 0..n_orb {
                        if p == q {
                            continue;
                        }
                        for spin_beta in [false, true] {
                            let (from, to) =
                                if spin_beta { (beta(p), beta(q)) } else { (alpha(p), alpha(q)) };
                            kinds.push(ExcitationKind::Single { from, to });
                            layers.push(layer);
                            let shared = spec.spin_adapted_singles
                                || (spec.tying == Tying::SharedFirstLayerSingles && layer == 0);
                            if shared {
                                slots.tied((layer, p, q));
                            } else {
                                slots.fresh();
                            }
                        }
                    }
                }
                for p in 0..n_orb {
                    for q in 0..n_orb {
                        if p != q {
                            kinds.push(ExcitationKind::PairDouble { from: p, to: q });
                            layers.push(layer);
                            slots.fresh();
                        }
                    }
                }
            }
        }
        AnsatzFlavor::Uccsd | AnsatzFlavor::Uccgsd => {
            let generalized = spec.flavor == AnsatzFlavor::Uccgsd;
            if !generalized && (n_alpha > n_orb || n_beta > n_orb) {
                return Err(Error::Ansatz("more electrons than orbitals in a spin channel".into()));
            }
            let occupied = |q: usize| if q.is_multiple_of(2) { q / 2 < n_alpha } else { q / 2 < n_beta };
            // Singles, same spin, ordered by (from, to).
            for from in 0..n_qubits {
                for to in 0..n_qubits {
                    if from == to || from % 2 != to % 2 {
                        continue;
                    }
                    let keep = if generalized { from < to } else { occupied(from) && !occupied(to) };
                    if !keep {
                        continue;
                    }
                    kinds.push(ExcitationKind::Single { from, to });
                    layers.push(0);
                    let shared = spec.spin_adapted_singles;
                    if shared {
                        slots.tied((0, from / 2, to / 2));
                    } else {
                        slots.fresh();
                    }
                }
            }
            // Doubles, S_z conserving, ordered by (from pair, to pair).
            let pairs: Vec<[usize; 2]> =
                (0..n_qubits).flat_map(|i| (i + 1..n_qubits).map(move |j| [i, j])).collect();
            let n_alpha_in = |p: &[usize; 2]| p.iter().filter(|&&q| q % 2 == 0).count();
            for from in &pairs {
                for to in &pairs {
                    if from.iter().any(|q| to.contains(q)) || n_alpha_in(from) != n_alpha_in(to) {
                        continue;
                    }
                    let keep = if generalized {
                        from < to
                    } else {
                        from.iter().all(|&q| occupied(q)) && to.iter().all(|&q| !occupied(q))
                    };
                    if keep {
                        kinds.push(ExcitationKind::Double { from: *from, to: *to });
                        layers.push(0);
                        slots.fresh();
                    }
                }
            }
        }
    }
    AnsatzProgram::from_parts(n_qubits, &kinds, layers, slots.map)
}

/// `(generators, parameters)` of the compiled program.
pub fn counts(spec: &AnsatzSpec, n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<(usize, usize)> {
    let p = compile_ansatz(spec, n_orb, n_alpha, n_beta)?;
    Ok((p.n_generators(), p.n_parameters()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::build_spin_observables;
    use crate::statevector::{index_from_occupation, occupation_string};

    fn ket_string(r: &ReferenceState) -> Vec<String> {
        r.kets.iter().map(|&(i, _)| occupation_string(i, r.n_qubits)).collect()
    }

    #[test]
    fn t0_kets() {
        assert_eq!(ket_string(&build_reference_t0(5, 6, 0).unwrap()), ["1111110000"]);
        assert_eq!(ket_string(&build_reference_t0(5, 6, 1).unwrap()), ["1111101000"]);
        assert_eq!(ket_string(&build_reference_t0(5, 6, 2).unwrap()), ["1110101010"]);
    }

    #[test]
    fn t1_kets() {
        let r = build_reference_t1(5, 6, 1).unwrap();
        assert_eq!(ket_string(&r), ["1111001010", "1111100010"]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(r.kets[0].1, Complex64::new(h, 0.0));
        assert_eq!(r.kets[1].1, Complex64::new(-h, 0.0));
        assert_eq!(build_reference_t1(5, 6, 0).unwrap(), build_reference_t0(5, 6, 0).unwrap());
        assert_eq!(build_reference_t1(5, 6, 2).unwrap(), build_reference_t0(5, 6, 2).unwrap());
        let obs = build_spin_observables(5);
        let s2 = r.to_state::<f64>().unwrap().expectation(&obs.s2).unwrap();
        assert!((s2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spin_formula_matches_observables() {
        let obs = build_spin_observables(5);
        for s in 0..=2 {
            let r = build_reference_t0(5, 6, s).unwrap();
            let exact = ReferenceState::determinant_s2(r.n_alpha - r.n_beta, 0);
            // Formula is rational: S(S+1) exactly.
            assert_eq!(exact, (s * (s + 1)) as f64);
            let psi = r.to_state::<f64>().unwrap();
            assert_eq!(psi.expectation(&obs.s2).unwrap(), exact);
            assert_eq!(psi.expectation(&obs.sz).unwrap(), s as f64);
            assert_eq!(psi.expectation(&obs.n).unwrap(), 6.0);
        }
    }

    #[test]
    fn infeasible_references() {
        assert!(build_reference_t0(5, 6, 3).is_err());
        assert!(build_reference_t0(2, 2, 2).is_err());
        assert!(build_reference_t0(3, 5, 0).is_err());
        assert!(build_reference_t0(3, 6, 1).is_err());
        assert!(build_reference_t1(3, 4, 1).is_err());
        assert!(build_reference_t1(4, 4, 1).is_ok());
    }

    #[test]
    fn kupccgsd_counts() {
        for (m, n) in [(5, 240), (6, 360), (7, 504), (8, 672), (9, 864)] {
            let spec = AnsatzSpec::kupccgsd(4);
            assert_eq!(counts(&spec, m, 3, 3).unwrap().0, n);
            let tied = AnsatzSpec { tying: Tying::SharedFirstLayerSingles, ..spec };
            assert_eq!(counts(&tied, m, 3, 3).unwrap().1, 11 * m * (m - 1));
        }
        let spec = AnsatzSpec { tying: Tying::SharedFirstLayerSingles, ..AnsatzSpec::kupccgsd(3) };
        assert_eq!(counts(&spec, 10, 4, 4).unwrap(), (810, 720));
        assert_eq!(counts(&AnsatzSpec::kupccgsd(4), 10, 4, 4).unwrap(), (1080, 1080));
        let spec = AnsatzSpec { tying: Tying::SharedFirstLayerSingles, ..AnsatzSpec::kupccgsd(4) };
        assert_eq!(counts(&spec, 10, 4, 4).unwrap(), (1080, 990));
    }

    #[test]
    fn uccsd_counts() {
        // 2 occupied / 2 virtual per spin in 4 orbitals
        let spec = AnsatzSpec { flavor: AnsatzFlavor::Uccsd, ..AnsatzSpec::kupccgsd(1) };
        let (g, p) = counts(&spec, 4, 2, 2).unwrap();
        // singles 2·2·2 = 8; doubles αα 1, ββ 1, αβ 4·4 = 16
        assert_eq!((g, p), (8 + 18, 26));
        let bad = AnsatzSpec { k: 2, ..spec };
        assert!(compile_ansatz(&bad, 4, 2, 2).is_err());
    }

    #[test]
    fn ordering_is_deterministic() {
        let spec = AnsatzSpec { spin_adapted_singles: true, ..AnsatzSpec::kupccgsd(2) };
        let a = compile_ansatz(&spec, 4, 2, 2).unwrap();
        let b = compile_ansatz(&spec, 4, 2, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generators()[0].kind(), ExcitationKind::Single { from: 0, to: 2 });
        assert_eq!(a.generators()[1].kind(), ExcitationKind::Single { from: 1, to: 3 });
        assert_eq!(a.slot_map()[0], a.slot_map()[1]);
        assert_eq!(a.n_parameters(), 2 * 2 * 4 * 3);
    }

    #[test]
    fn zero_angles_leave_state() {
        let spec = AnsatzSpec::kupccgsd(2);
        let prog = compile_ansatz(&spec, 3, 2, 1).unwrap();
        let psi = StateVector::<f64>::random(6, 3);
        let out = apply_ansatz(&psi, &prog, &vec![0.0; prog.n_parameters()]).unwrap();
        assert_eq!(out, psi);
        assert!(apply_ansatz(&psi, &prog, &[0.0]).is_err());
    }

    #[test]
    fn index_helpers_agree() {
        let r = build_reference_t0(5, 6, 2).unwrap();
        assert_eq!(r.kets[0].0, index_from_occupation("1110101010").unwrap());
    }
}
