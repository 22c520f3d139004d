use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients below this magnitude are dropped after accumulation.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Tensor product of single-qubit Paulis as symplectic bitmasks.
///
/// Qubit `q` carries `I` for `(x, z) = (0, 0)`, `X` for `(1, 0)`, `Z` for
/// `(0, 1)` and `Y` for `(1, 1)`. With `Y = iXZ` the operator equals
/// `i^{|x∧z|} X^x Z^z`, so every letter string is hermitian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliLetters {
    pub x: u64,
    pub z: u64,
}

impl PauliLetters {
    pub const IDENTITY: Self = Self { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        Self { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        Self { x: 1 << q, z: 1 << q }
    }

    pub fn z(q: usize) -> Self {
        Self { x: 0, z: 1 << q }
    }

    /// `Z` on every qubit below `q`.
    pub fn parity_below(q: usize) -> Self {
        Self { x: 0, z: (1u64 << q) - 1 }
    }

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of `Y` letters.
    #[inline]
    pub fn n_y(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self · other` as `(power of i, letters)`.
    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> (u32, Self) {
        let out = Self { x: self.x ^ other.x, z: self.z ^ other.z };
        let k = self.n_y() + other.n_y() + 2 * (self.z & other.x).count_ones() + 4 - out.n_y() % 4;
        (k % 4, out)
    }

    /// `P|b⟩ = phase · |b ⊕ x⟩`; returns the phase.
    #[inline]
    pub fn phase_on(self, basis: usize) -> Complex64 {
        let sign = (self.z & basis as u64).count_ones() & 1;
        I_POW[((self.n_y() + 2 * sign) % 4) as usize]
    }

    pub fn commutes_with(self, other: Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    pub fn letter(self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    /// Letters with the most significant qubit first.
    pub fn to_label(self, n_qubits: usize) -> String {
        (0..n_qubits).rev().map(|q| self.letter(q)).collect()
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n > 64 {
            return Err(Error::Dimension(format!("{n} qubits exceed the 64-qubit mask")));
        }
        let mut out = Self::IDENTITY;
        for (i, c) in label.chars().enumerate() {
            let q = n - 1 - i;
            match c {
                'I' => {}
                'X' => out.x |= 1 << q,
                'Y' => {
                    out.x |= 1 << q;
                    out.z |= 1 << q;
                }
                'Z' => out.z |= 1 << q,
                _ => return Err(Error::Index(format!("invalid Pauli letter {c:?}"))),
            }
        }
        Ok(out)
    }
}

/// A single weighted Pauli string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliString {
    pub coeff: Complex64,
    pub letters: PauliLetters,
}

impl PauliString {
    pub fn new(coeff: Complex64, letters: PauliLetters) -> Self {
        Self { coeff, letters }
    }
}

impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        let (k, letters) = self.letters.mul(rhs.letters);
        PauliString { coeff: self.coeff * rhs.coeff * I_POW[k as usize], letters }
    }
}

/// Weighted sum of distinct Pauli strings on `n_qubits` qubits. Terms are kept
/// in a sorted map so iteration order, and hence every accumulation built on
/// it, is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliLetters, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits are supported");
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(Complex64::new(coeff, 0.0), PauliLetters::IDENTITY);
        s
    }

    pub fn from_term(n_qubits: usize, coeff: Complex64, letters: PauliLetters) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(coeff, letters);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PauliString> + '_ {
        self.terms.iter().map(|(&letters, &coeff)| PauliString { coeff, letters })
    }

    pub fn coeff(&self, letters: PauliLetters) -> Complex64 {
        self.terms.get(&letters).copied().unwrap_or_default()
    }

    /// Accumulates without pruning; call [`PauliSum::prune`] when done.
    pub fn add_term(&mut self, coeff: Complex64, letters: PauliLetters) {
        debug_assert!(self.n_qubits == 64 || (letters.x | letters.z) >> self.n_qubits == 0);
        *self.terms.entry(letters).or_default() += coeff;
    }

    pub fn add_scaled(&mut self, other: &PauliSum, factor: Complex64) {
        for (&l, &c) in &other.terms {
            self.add_term(c * factor, l);
        }
    }

    /// Drops terms with `|c| < threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    pub fn pruned(mut self) -> Self {
        self.prune(PRUNE_THRESHOLD);
        self
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= factor);
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = c.conj());
        out
    }

    /// Largest imaginary part among the coefficients. Zero for a hermitian sum.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        (self * other - other * self).pruned()
    }

    pub fn anticommutator(&self, other: &PauliSum) -> PauliSum {
        (self * other + other * self).pruned()
    }

    /// Dense `2^n × 2^n` matrix. Only sensible for a handful of qubits.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (l, c) in &self.terms {
            for b in 0..dim {
                m[(b ^ l.x as usize, b)] += c * l.phase_on(b);
            }
        }
        m
    }

    /// One term per line: `re im LETTERS`, most significant qubit first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, c) in &self.terms {
            out.push_str(&format!("{} {} {}\n", c.re, c.im, l.to_label(self.n_qubits)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sum: Option<PauliSum> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            if toks.len() != 3 {
                return Err(bad("expected `re im LETTERS`"));
            }
            let re: f64 = toks[0].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = toks[1].parse().map_err(|_| bad("bad imaginary part"))?;
            let letters = PauliLetters::from_label(toks[2]).map_err(|e| bad(&e.to_string()))?;
            let n = toks[2].len();
            let s = sum.get_or_insert_with(|| PauliSum::zero(n));
            if s.n_qubits != n {
                return Err(bad("inconsistent string length"));
            }
            s.add_term(Complex64::new(re, im), letters);
        }
        sum.ok_or(Error::Parse { line: 0, msg: "empty Pauli sum".into() })
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<'a> Add<&'a PauliSum> for &'a PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = self.clone();
        out.add_scaled(rhs, Complex64::new(1.0, 0.0));
        out
    }
}

impl Add for PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: PauliSum) -> PauliSum {
        &self + &rhs
    }
}

impl<'a> Sub<&'a PauliSum> for &'a PauliSum {
    type Output = PauliSum;

    fn sub(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = self.clone();
        out.add_scaled(rhs, Complex64::new(-1.0, 0.0));
        out
    }
}

impl Sub for PauliSum {
    type Output = PauliSum;

    fn sub(self, rhs: PauliSum) -> PauliSum {
        &self - &rhs
    }
}

impl<'a> Mul<&'a PauliSum> for &'a PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits);
        let mut out = PauliSum::zero(self.n_qubits);
        for a in self.iter() {
            for b in rhs.iter() {
                let p = a * b;
                out.add_term(p.coeff, p.letters);
            }
        }
        out
    }
}

impl Mul for PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: PauliSum) -> PauliSum {
        &self * &rhs
    }
}
