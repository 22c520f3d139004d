//! Active-space integrals: FCIDUMP parsing, validation, energy contraction and
//! orbital rotations.
//!
//! Two-electron integrals use the chemists' convention `g[p,q,r,s] = (pq|rs)`,
//! paired with the operator order `a†_p a†_r a_s a_q`, so that
//!
//! ```text
//! H = E_core + Σ_pq h_pq Σ_σ a†_pσ a_qσ + ½ Σ_pqrs g_pqrs Σ_στ a†_pσ a†_rτ a_sτ a_qσ
//! ```

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::{Error, Result};

/// Tolerance for entries of the same symmetry class that appear twice in a file.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveSpaceIntegrals {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Nuclear repulsion plus inactive-shell energy, Hartree.
    pub core_energy: f64,
    /// Effective one-electron integrals, symmetric.
    pub h: DMatrix<f64>,
    /// Two-electron integrals, row-major `[p, q, r, s]`.
    pub g: Vec<f64>,
    /// Orbital symmetry labels from the header, when present. Not used.
    pub orbsym: Vec<i64>,
    pub isym: Option<i64>,
}

#[inline]
fn idx4(m: usize, p: usize, q: usize, r: usize, s: usize) -> usize {
    ((p * m + q) * m + r) * m + s
}

/// The eight index tuples equivalent to `(p, q, r, s)` for real orbitals.
pub fn eightfold(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

fn canonical4(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    *eightfold(p, q, r, s).iter().min().unwrap()
}

impl ActiveSpaceIntegrals {
    /// All-zero integrals with the given electron counts.
    pub fn zeros(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        Self {
            n_orb,
            n_alpha,
            n_beta,
            core_energy: 0.0,
            h: DMatrix::zeros(n_orb, n_orb),
            g: vec![0.0; n_orb.pow(4)],
            orbsym: Vec::new(),
            isym: None,
        }
    }

    pub fn new(
        n_orb: usize,
        n_alpha: usize,
        n_beta: usize,
        core_energy: f64,
        h: DMatrix<f64>,
        g: Vec<f64>,
    ) -> Result<Self> {
        let ints = Self {
            n_orb,
            n_alpha,
            n_beta,
            core_energy,
            h,
            g,
            orbsym: Vec::new(),
            isym: None,
        };
        ints.validate(1e-12)?;
        Ok(ints)
    }

    /// Random symmetric instance, useful for tests and benchmarks. Entries of
    /// `h` lie in `[-1, 1]`, entries of `g` in `[-0.5, 0.5]`, with the
    /// diagonal of `h` shifted down so lower orbitals are lower in energy.
    pub fn random(n_orb: usize, n_alpha: usize, n_beta: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ints = Self::zeros(n_orb, n_alpha, n_beta);
        ints.core_energy = rng.gen_range(-1.0..1.0);
        for p in 0..n_orb {
            for q in p..n_orb {
                let mut x = rng.gen_range(-1.0..1.0);
                if p == q {
                    x += -2.0 + p as f64 * 0.5;
                }
                ints.h[(p, q)] = x;
                ints.h[(q, p)] = x;
            }
        }
        let m = n_orb;
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        if canonical4(p, q, r, s) != (p, q, r, s) {
                            continue;
                        }
                        let x = rng.gen_range(-0.5..0.5);
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            ints.g[idx4(m, a, b, c, d)] = x;
                        }
                    }
                }
            }
        }
        ints
    }

    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g[idx4(self.n_orb, p, q, r, s)]
    }

    #[inline]
    pub fn set_g_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            let m = self.n_orb;
            self.g[idx4(m, a, b, c, d)] = value;
        }
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// Checks electron counts, shapes, symmetry of `h` and 8-fold symmetry of
    /// `g` to within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.n_orb;
        if m == 0 {
            return Err(Error::InvalidIntegrals("no active orbitals".into()));
        }
        let n = self.n_electrons();
        if n == 0 || n > 2 * m {
            return Err(Error::InvalidIntegrals(format!(
                "{n} electrons do not fit in {m} orbitals"
            )));
        }
        if self.n_alpha < self.n_beta || self.n_alpha > m {
            return Err(Error::InvalidIntegrals(format!(
                "unsupported spin populations n_alpha={} n_beta={}",
                self.n_alpha, self.n_beta
            )));
        }
        if self.h.nrows() != m || self.h.ncols() != m || self.g.len() != m.pow(4) {
            return Err(Error::Dimension(format!("integral arrays do not match n_orb={m}")));
        }
        for p in 0..m {
            for q in 0..p {
                if (self.h[(p, q)] - self.h[(q, p)]).abs() > tol {
                    return Err(Error::InvalidIntegrals(format!("h[{p},{q}] != h[{q},{p}]")));
                }
            }
        }
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        let v = self.g(p, q, r, s);
                        for (a, b, c, d) in eightfold(p, q, r, s) {
                            if (self.g(a, b, c, d) - v).abs() > tol {
                                return Err(Error::InvalidIntegrals(format!(
                                    "g[{p},{q},{r},{s}] breaks 8-fold symmetry"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to FCIDUMP text, writing each symmetry class once.
    pub fn to_fcidump(&self) -> String {
        use std::fmt::Write;
        let m = self.n_orb;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "&FCI NORB={}, NELEC={}, MS2={},",
            m,
            self.n_electrons(),
            self.n_alpha - self.n_beta
        );
        if !self.orbsym.is_empty() {
            let syms: Vec<String> = self.orbsym.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, " ORBSYM={},", syms.join(","));
        }
        let _ = writeln!(out, " ISYM={},", self.isym.unwrap_or(1));
        let _ = writeln!(out, "&END");
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        if canonical4(p, q, r, s) == (p, q, r, s) {
                            let v = self.g(p, q, r, s);
                            if v != 0.0 {
                                let _ = writeln!(out, "{v:.17e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                            }
                        }
                    }
                }
            }
        }
        for p in 0..m {
            for q in 0..=p {
                let v = self.h[(p, q)];
                if v != 0.0 {
                    let _ = writeln!(out, "{v:.17e} {} {} 0 0", p + 1, q + 1);
                }
            }
        }
        let _ = writeln!(out, "{:.17e} 0 0 0 0", self.core_energy);
        out
    }
}

#[derive(Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: i64,
    orbsym: Vec<i64>,
    isym: Option<i64>,
}

fn parse_header(text: &str, first_line: usize) -> Result<Header> {
    let mut hdr = Header::default();
    // Tokenize on commas and whitespace, then regroup `KEY=v1,v2,...`.
    let mut key: Option<String> = None;
    let cleaned = text.replace(',', " ");
    for tok in cleaned.split_whitespace() {
        let upper = tok.to_ascii_uppercase();
        if upper == "&FCI" || upper == "&END" || upper == "/" || upper == "$END" {
            continue;
        }
        let (k, v) = match upper.split_once('=') {
            Some((k, v)) => (Some(k.trim().to_string()), v.trim().to_string()),
            None => (None, upper.clone()),
        };
        if let Some(k) = k {
            key = Some(k);
        }
        if v.is_empty() {
            continue;
        }
        let Some(k) = key.as_deref() else {
            return Err(Error::Parse {
                line: first_line,
                msg: format!("unexpected header token {tok:?}"),
            });
        };
        let int = |v: &str| -> Result<i64> {
            v.parse::<i64>().map_err(|_| Error::Parse {
                line: first_line,
                msg: format!("header field {k} has non-integer value {v:?}"),
            })
        };
        match k {
            "NORB" => hdr.norb = Some(usize::try_from(int(&v)?).map_err(|_| Error::Parse {
                line: first_line,
                msg: "NORB must be non-negative".into(),
            })?),
            "NELEC" => hdr.nelec = Some(usize::try_from(int(&v)?).map_err(|_| Error::Parse {
                line: first_line,
                msg: "NELEC must be non-negative".into(),
            })?),
            "MS2" => hdr.ms2 = int(&v)?,
            "ORBSYM" => hdr.orbsym.push(int(&v)?),
            "ISYM" => hdr.isym = Some(int(&v)?),
            // UHF, IUHF, IPRTIM, ST and friends are accepted and ignored.
            _ => {}
        }
    }
    Ok(hdr)
}

fn parse_value(tok: &str) -> Option<f64> {
    tok.parse::<f64>()
        .ok()
        .or_else(|| tok.replace(['D', 'd'], "E").parse::<f64>().ok())
}

/// Parses FCIDUMP text into fully symmetry-expanded integrals.
pub fn parse_fcidump(text: &str) -> Result<ActiveSpaceIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| l.trim_start().to_ascii_uppercase().starts_with("&FCI"))
        .ok_or(Error::Parse { line: 1, msg: "missing &FCI header".into() })?;
    let mut end = None;
    let mut header_text = String::new();
    for (i, l) in lines.iter().enumerate().skip(start) {
        let u = l.to_ascii_uppercase();
        let term = u.find("&END").or_else(|| u.find("$END")).or_else(|| u.find('/'));
        match term {
            Some(pos) => {
                header_text.push_str(&l[..pos]);
                end = Some(i);
                break;
            }
            None => {
                header_text.push_str(l);
                header_text.push(' ');
            }
        }
    }
    let end = end.ok_or(Error::Parse {
        line: start + 1,
        msg: "header is not terminated by &END or /".into(),
    })?;
    let hdr = parse_header(&header_text, start + 1)?;
    let m = hdr.norb.ok_or(Error::Parse { line: start + 1, msg: "missing NORB".into() })?;
    let nelec = hdr.nelec.ok_or(Error::Parse { line: start + 1, msg: "missing NELEC".into() })?;
    if m == 0 {
        return Err(Error::Parse { line: start + 1, msg: "NORB must be positive".into() });
    }
    if hdr.ms2 < 0 || (hdr.ms2 as usize) > nelec || !(nelec - hdr.ms2 as usize).is_multiple_of(2) {
        return Err(Error::Parse {
            line: start + 1,
            msg: format!("MS2={} is inconsistent with NELEC={nelec}", hdr.ms2),
        });
    }
    let n_alpha = (nelec + hdr.ms2 as usize) / 2;
    let n_beta = nelec - n_alpha;

    let mut ints = ActiveSpaceIntegrals::zeros(m, n_alpha, n_beta);
    ints.orbsym = hdr.orbsym;
    ints.isym = hdr.isym;

    #[derive(Hash, PartialEq, Eq)]
    enum Class {
        Core,
        One(usize, usize),
        Two(usize, usize, usize, usize),
    }
    let mut seen: HashMap<Class, (f64, usize)> = HashMap::new();

    for (i, raw) in lines.iter().enumerate().skip(end + 1) {
        let line_no = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `value i j k l`, found {} fields", toks.len()),
            });
        }
        let value = parse_value(toks[0]).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("bad value {:?}", toks[0]),
        })?;
        let mut ix = [0usize; 4];
        for (slot, t) in ix.iter_mut().zip(&toks[1..]) {
            let v: i64 = t.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad index {t:?}"),
            })?;
            if v < 0 || v as usize > m {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("index {v} out of range [1, {m}]"),
                });
            }
            *slot = v as usize;
        }
        let [i1, j1, k1, l1] = ix;
        let class = match (i1, j1, k1, l1) {
            (0, 0, 0, 0) => Class::Core,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (a, b) = (i.min(j) - 1, i.max(j) - 1);
                Class::One(a, b)
            }
            // Orbital energies; carry no information needed here.
            (i, 0, 0, 0) if i > 0 => continue,
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (a, b, c, d) = canonical4(i - 1, j - 1, k - 1, l - 1);
                Class::Two(a, b, c, d)
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unrecognized index pattern {i1} {j1} {k1} {l1}"),
                })
            }
        };
        if let Some(&(prev, prev_line)) = seen.get(&class) {
            if (prev - value).abs() > DUPLICATE_TOLERANCE {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "value {value} conflicts with {prev} given on line {prev_line} for the same integral"
                    ),
                });
            }
            continue;
        }
        match class {
            Class::Core => ints.core_energy = value,
            Class::One(a, b) => {
                ints.h[(a, b)] = value;
                ints.h[(b, a)] = value;
            }
            Class::Two(a, b, c, d) => ints.set_g_symmetric(a, b, c, d, value),
        }
        seen.insert(class, (value, line_no));
    }
    ints.validate(0.0).map_err(|e| Error::Parse { line: start + 1, msg: e.to_string() })?;
    Ok(ints)
}

/// `Σ h_pq γ_pq + ½ Σ g_pqrs Γ_pqrs + E_core` for spin-summed RDMs, with
/// `Γ[p,q,r,s] = Σ_στ ⟨a†_pσ a†_rτ a_sτ a_qσ⟩` stored row-major.
pub fn energy_from_rdms(ints: &ActiveSpaceIntegrals, gamma: &DMatrix<f64>, two: &[f64]) -> Result<f64> {
    let m = ints.n_orb;
    if gamma.nrows() != m || gamma.ncols() != m || two.len() != m.pow(4) {
        return Err(Error::Dimension(format!(
            "RDMs of size {}x{} / {} do not match n_orb={m}",
            gamma.nrows(),
            gamma.ncols(),
            two.len()
        )));
    }
    let one: f64 = ints.h.iter().zip(gamma.iter()).map(|(a, b)| a * b).sum();
    let two_e: f64 = ints.g.iter().zip(two).map(|(a, b)| a * b).sum();
    Ok(one + 0.5 * two_e + ints.core_energy)
}

/// Antisymmetric generator of a real orbital rotation. Only the `p < q`
/// entries are stored; `κ_qp = -κ_pq`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalRotation {
    n_orb: usize,
    upper: Vec<f64>,
}

impl OrbitalRotation {
    pub fn zeros(n_orb: usize) -> Self {
        Self { n_orb, upper: vec![0.0; n_orb * n_orb.saturating_sub(1) / 2] }
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    fn slot(&self, p: usize, q: usize) -> usize {
        debug_assert!(p < q && q < self.n_orb);
        p * self.n_orb - p * (p + 1) / 2 + (q - p - 1)
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        match p.cmp(&q) {
            std::cmp::Ordering::Less => self.upper[self.slot(p, q)],
            std::cmp::Ordering::Greater => -self.upper[self.slot(q, p)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Sets `κ_pq = value` (and so `κ_qp = -value`). Requires `p != q`.
    pub fn set(&mut self, p: usize, q: usize, value: f64) {
        assert_ne!(p, q, "diagonal of an orbital rotation is fixed at zero");
        if p < q {
            let s = self.slot(p, q);
            self.upper[s] = value;
        } else {
            let s = self.slot(q, p);
            self.upper[s] = -value;
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.upper
    }

    /// Takes the strictly upper triangle of `k`; the lower triangle is ignored.
    pub fn from_matrix(k: &DMatrix<f64>) -> Self {
        let mut rot = Self::zeros(k.nrows());
        for p in 0..k.nrows() {
            for q in p + 1..k.nrows() {
                rot.set(p, q, k[(p, q)]);
            }
        }
        rot
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_orb, self.n_orb, |p, q| self.get(p, q))
    }

    /// `U = exp(κ)`.
    pub fn unitary(&self) -> DMatrix<f64> {
        linalg::expm_antisymmetric(&self.to_matrix())
    }

    /// Generator whose exponential is the proper orthogonal matrix `u`.
    pub fn from_orthogonal(u: &DMatrix<f64>) -> Result<Self> {
        Ok(Self::from_matrix(&linalg::logm_orthogonal(u)?))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n_orb: self.n_orb, upper: self.upper.iter().map(|x| x * factor).collect() }
    }

    /// Frobenius norm of the independent parameters.
    pub fn norm(&self) -> f64 {
        self.upper.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Rotates the orbital basis by `U = exp(κ)`: `h' = Uᵀ h U` and the same
/// transform on each index of `g`.
pub fn rotate_integrals(ints: &ActiveSpaceIntegrals, rot: &OrbitalRotation) -> Result<ActiveSpaceIntegrals> {
    if rot.n_orb() != ints.n_orb {
        return Err(Error::Dimension(format!(
            "rotation of size {} for {} orbitals",
            rot.n_orb(),
            ints.n_orb
        )));
    }
    Ok(transform_integrals(ints, &rot.unitary()))
}

/// Basis change by an explicit orthogonal matrix (columns are new orbitals).
pub fn transform_integrals(ints: &ActiveSpaceIntegrals, u: &DMatrix<f64>) -> ActiveSpaceIntegrals {
    let m = ints.n_orb;
    let h = u.transpose() * &ints.h * u;
    let h = (&h + h.transpose()) * 0.5;

    // Quarter transforms; each step replaces one index.
    let mut cur = ints.g.clone();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..4 {
        next.iter_mut().for_each(|x| *x = 0.0);
        let stride = m.pow(3 - axis as u32);
        for (flat, out) in next.iter_mut().enumerate() {
            let new_i = (flat / stride) % m;
            let base = flat - new_i * stride;
            let mut acc = 0.0;
            for a in 0..m {
                acc += u[(a, new_i)] * cur[base + a * stride];
            }
            *out = acc;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut out = ints.clone();
    out.h = h;
    // Re-impose exact symmetry: average each class of 8 images.
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    if canonical4(p, q, r, s) == (p, q, r, s) {
                        let imgs = eightfold(p, q, r, s);
                        let avg = imgs.iter().map(|&(a, b, c, d)| cur[idx4(m, a, b, c, d)]).sum::<f64>() / 8.0;
                        for (a, b, c, d) in imgs {
                            out.g[idx4(m, a, b, c, d)] = avg;
                        }
                    }
                }
            }
        }
    }
    out
}
