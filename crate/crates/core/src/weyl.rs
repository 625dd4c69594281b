//! Generalized Pauli (Weyl) operators over Z_d and their Clifford conjugation.
//!
//! An operator is stored as `ω^phase · ∏_i X_i^{x_i} Z_i^{z_i}` with X written
//! before Z on every site. With `X|j⟩ = |j+1⟩` and `Z|j⟩ = ω^j|j⟩` one has
//! `Z X = ω X Z`, which fixes the phase rule of [`WeylOp::compose`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{self, add, is_odd_prime, mul, neg, sub};

/// Largest supported dimension; exponents are stored as `u8`.
pub const MAX_DIM: u32 = 251;

pub fn check_dim(d: u32) -> Result<u8> {
    if d > MAX_DIM || !is_odd_prime(d) {
        return Err(Error::InvalidDimension(d));
    }
    Ok(d as u8)
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWeyl", into = "RawWeyl")]
pub struct WeylOp {
    d: u8,
    x: Vec<u8>,
    z: Vec<u8>,
    phase: u8,
}

#[derive(Serialize, Deserialize)]
struct RawWeyl {
    d: u32,
    x_exp: Vec<i64>,
    z_exp: Vec<i64>,
    #[serde(default)]
    phase: i64,
}

impl TryFrom<RawWeyl> for WeylOp {
    type Error = Error;
    fn try_from(r: RawWeyl) -> Result<Self> {
        WeylOp::from_signed(r.d, &r.x_exp, &r.z_exp, r.phase)
    }
}

impl From<WeylOp> for RawWeyl {
    fn from(w: WeylOp) -> Self {
        RawWeyl {
            d: w.d as u32,
            x_exp: w.x.iter().map(|&v| v as i64).collect(),
            z_exp: w.z.iter().map(|&v| v as i64).collect(),
            phase: w.phase as i64,
        }
    }
}

impl WeylOp {
    pub fn identity(d: u32, n: usize) -> Result<Self> {
        let d = check_dim(d)?;
        Ok(WeylOp { d, x: vec![0; n], z: vec![0; n], phase: 0 })
    }

    /// Builds an operator from arbitrary integer exponents, reducing them mod d.
    pub fn from_signed(d: u32, x: &[i64], z: &[i64], phase: i64) -> Result<Self> {
        let dd = check_dim(d)?;
        if x.len() != z.len() {
            return Err(Error::ArityMismatch { left: x.len(), right: z.len() });
        }
        Ok(WeylOp {
            d: dd,
            x: x.iter().map(|&v| modular::reduce(v, d)).collect(),
            z: z.iter().map(|&v| modular::reduce(v, d)).collect(),
            phase: modular::reduce(phase, d),
        })
    }

    pub fn from_parts(d: u32, x: Vec<u8>, z: Vec<u8>, phase: u8) -> Result<Self> {
        let dd = check_dim(d)?;
        if x.len() != z.len() {
            return Err(Error::ArityMismatch { left: x.len(), right: z.len() });
        }
        Ok(WeylOp {
            d: dd,
            x: x.into_iter().map(|v| v % dd).collect(),
            z: z.into_iter().map(|v| v % dd).collect(),
            phase: phase % dd,
        })
    }

    /// `X^a Z^b` on one site of an n-qudit register.
    pub fn single(d: u32, n: usize, site: usize, a: i64, b: i64) -> Result<Self> {
        if site >= n {
            return Err(Error::TargetOutOfRange { index: site, n });
        }
        let mut w = WeylOp::identity(d, n)?;
        w.x[site] = modular::reduce(a, d);
        w.z[site] = modular::reduce(b, d);
        Ok(w)
    }

    pub fn x_on(d: u32, n: usize, site: usize) -> Result<Self> {
        WeylOp::single(d, n, site, 1, 0)
    }

    pub fn z_on(d: u32, n: usize, site: usize) -> Result<Self> {
        WeylOp::single(d, n, site, 0, 1)
    }

    /// Operator with the given (site, x, z) factors; repeated sites multiply in order.
    pub fn from_factors(d: u32, n: usize, factors: &[(usize, i64, i64)]) -> Result<Self> {
        let mut w = WeylOp::identity(d, n)?;
        for &(s, a, b) in factors {
            let f = WeylOp::single(d, n, s, a, b)?;
            w = w.compose(&f)?;
        }
        Ok(w)
    }

    pub fn d(&self) -> u32 {
        self.d as u32
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_exp(&self) -> &[u8] {
        &self.x
    }

    pub fn z_exp(&self) -> &[u8] {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: i64) -> Self {
        self.phase = modular::reduce(k, self.d as u32);
        self
    }

    /// Multiplies by ω^k.
    pub fn times_omega(mut self, k: i64) -> Self {
        let k = modular::reduce(k, self.d as u32);
        self.phase = add(self.phase, k, self.d);
        self
    }

    pub fn set_site(&mut self, site: usize, a: u8, b: u8) {
        self.x[site] = a % self.d;
        self.z[site] = b % self.d;
    }

    pub fn site(&self, site: usize) -> (u8, u8) {
        (self.x[site], self.z[site])
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_scalar()
    }

    /// True when the operator is a pure phase ω^k·1.
    pub fn is_scalar(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.z.iter().all(|&v| v == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.x[i] != 0 || self.z[i] != 0).collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// True when the operator only contains X factors.
    pub fn is_x_type(&self) -> bool {
        self.z.iter().all(|&v| v == 0)
    }

    pub fn is_z_type(&self) -> bool {
        self.x.iter().all(|&v| v == 0)
    }

    pub fn same_pauli(&self, other: &WeylOp) -> bool {
        self.x == other.x && self.z == other.z
    }

    fn check_compatible(&self, other: &WeylOp) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d as u32, right: other.d as u32 });
        }
        if self.n() != other.n() {
            return Err(Error::ArityMismatch { left: self.n(), right: other.n() });
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &WeylOp) -> Result<WeylOp> {
        self.check_compatible(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &WeylOp) -> WeylOp {
        let d = self.d;
        let mut phase = add(self.phase, other.phase, d) as u32;
        for i in 0..self.n() {
            phase += mul(self.z[i], other.x[i], d) as u32;
        }
        WeylOp {
            d,
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| add(a, b, d)).collect(),
            z: self.z.iter().zip(&other.z).map(|(&a, &b)| add(a, b, d)).collect(),
            phase: (phase % d as u32) as u8,
        }
    }

    /// Σ_i (x_i z'_i − z_i x'_i) mod d; `a·b = ω^{−s} b·a`.
    pub fn symplectic_product(&self, other: &WeylOp) -> Result<u8> {
        self.check_compatible(other)?;
        Ok(self.sp_unchecked(other))
    }

    pub(crate) fn sp_unchecked(&self, other: &WeylOp) -> u8 {
        sp_slices(&self.x, &self.z, &other.x, &other.z, self.d)
    }

    pub fn commutes_with(&self, other: &WeylOp) -> Result<bool> {
        Ok(self.symplectic_product(other)? == 0)
    }

    /// `self^k` for any integer k (negative powers invert).
    pub fn pow(&self, k: i64) -> WeylOp {
        let d = self.d as i64;
        let k = k.rem_euclid(d);
        // (X^a Z^b)^k = ω^{ab·k(k−1)/2} X^{ka} Z^{kb}
        let tri = (k * (k - 1) / 2).rem_euclid(d);
        let mut cross = 0i64;
        for i in 0..self.n() {
            cross += self.x[i] as i64 * self.z[i] as i64;
        }
        let phase = (self.phase as i64 * k + cross * tri).rem_euclid(d) as u8;
        WeylOp {
            d: self.d,
            x: self.x.iter().map(|&a| ((a as i64 * k) % d) as u8).collect(),
            z: self.z.iter().map(|&b| ((b as i64 * k) % d) as u8).collect(),
            phase,
        }
    }

    pub fn inverse(&self) -> WeylOp {
        self.pow(-1)
    }

    /// Restricts to a subset of sites, in the given order.
    pub fn restrict(&self, sites: &[usize]) -> WeylOp {
        WeylOp {
            d: self.d,
            x: sites.iter().map(|&s| self.x[s]).collect(),
            z: sites.iter().map(|&s| self.z[s]).collect(),
            phase: self.phase,
        }
    }

    /// Phase for which `self` has eigenvalues exactly the d-th roots of unity.
    ///
    /// For odd d every Weyl operator already satisfies W^d = 1, so this is
    /// always `Ok`; kept as an explicit check for deserialized input.
    pub fn check_unit_order(&self) -> Result<()> {
        let w = self.pow(self.d as i64 - 1).compose_unchecked(self);
        if w.is_identity() {
            Ok(())
        } else {
            Err(Error::NotUnitOrder)
        }
    }

    /// Human-readable label such as `ω^2·X0 Z1^2`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for i in 0..self.n() {
            let (a, b) = (self.x[i], self.z[i]);
            let mut s = String::new();
            if a != 0 {
                s.push_str(&format!("X{i}"));
                if a != 1 {
                    s.push_str(&format!("^{a}"));
                }
            }
            if b != 0 {
                s.push_str(&format!("Z{i}"));
                if b != 1 {
                    s.push_str(&format!("^{b}"));
                }
            }
            if !s.is_empty() {
                parts.push(s);
            }
        }
        let body = if parts.is_empty() { "I".to_string() } else { parts.join(" ") };
        if self.phase == 0 {
            body
        } else {
            format!("ω^{}·{}", self.phase, body)
        }
    }
}

impl fmt::Debug for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylOp(d={}, {})", self.d, self.label())
    }
}

impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[inline]
pub(crate) fn sp_slices(ax: &[u8], az: &[u8], bx: &[u8], bz: &[u8], d: u8) -> u8 {
    let mut pos = 0u32;
    let mut negs = 0u32;
    for i in 0..ax.len() {
        pos += ax[i] as u32 * bz[i] as u32;
        negs += az[i] as u32 * bx[i] as u32;
    }
    let d32 = d as u32;
    ((pos % d32 + d32 - negs % d32) % d32) as u8
}

pub fn compose(a: &WeylOp, b: &WeylOp) -> Result<WeylOp> {
    a.compose(b)
}

pub fn symplectic_product(a: &WeylOp, b: &WeylOp) -> Result<u8> {
    a.symplectic_product(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    ShiftX,
    ShiftXdag,
    ClockZ,
    ClockZdag,
    Conj,
    Fourier,
    FourierDag,
    CX,
    CXdag,
    CZ,
    CZdag,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::ShiftX,
        GateKind::ShiftXdag,
        GateKind::ClockZ,
        GateKind::ClockZdag,
        GateKind::Conj,
        GateKind::Fourier,
        GateKind::FourierDag,
        GateKind::CX,
        GateKind::CXdag,
        GateKind::CZ,
        GateKind::CZdag,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CXdag | GateKind::CZ | GateKind::CZdag => 2,
            _ => 1,
        }
    }

    pub fn inverse(self) -> GateKind {
        use GateKind::*;
        match self {
            ShiftX => ShiftXdag,
            ShiftXdag => ShiftX,
            ClockZ => ClockZdag,
            ClockZdag => ClockZ,
            Conj => Conj,
            Fourier => FourierDag,
            FourierDag => Fourier,
            CX => CXdag,
            CXdag => CX,
            CZ => CZdag,
            CZdag => CZ,
        }
    }

    pub fn name(self) -> &'static str {
        use GateKind::*;
        match self {
            ShiftX => "X",
            ShiftXdag => "Xdg",
            ClockZ => "Z",
            ClockZdag => "Zdg",
            Conj => "C",
            Fourier => "H",
            FourierDag => "Hdg",
            CX => "CX",
            CXdag => "CXdg",
            CZ => "CZ",
            CZdag => "CZdg",
        }
    }

    /// Images of the local generators under `g · W · g†`.
    ///
    /// One-qudit kinds return `[X, Z]`, two-qudit kinds `[X_c, Z_c, X_t, Z_t]`,
    /// each as an operator on 1 or 2 local sites (control first).
    fn generator_images(self, d: u32) -> Vec<WeylOp> {
        use GateKind::*;
        let w = |x: &[i64], z: &[i64], p: i64| WeylOp::from_signed(d, x, z, p).unwrap();
        match self {
            ShiftX => vec![w(&[1], &[0], 0), w(&[0], &[1], -1)],
            ShiftXdag => vec![w(&[1], &[0], 0), w(&[0], &[1], 1)],
            ClockZ => vec![w(&[1], &[0], 1), w(&[0], &[1], 0)],
            ClockZdag => vec![w(&[1], &[0], -1), w(&[0], &[1], 0)],
            Conj => vec![w(&[-1], &[0], 0), w(&[0], &[-1], 0)],
            Fourier => vec![w(&[0], &[1], 0), w(&[-1], &[0], 0)],
            FourierDag => vec![w(&[0], &[-1], 0), w(&[1], &[0], 0)],
            CX => vec![
                w(&[1, 1], &[0, 0], 0),
                w(&[0, 0], &[1, 0], 0),
                w(&[0, 1], &[0, 0], 0),
                w(&[0, 0], &[-1, 1], 0),
            ],
            CXdag => vec![
                w(&[1, -1], &[0, 0], 0),
                w(&[0, 0], &[1, 0], 0),
                w(&[0, 1], &[0, 0], 0),
                w(&[0, 0], &[1, 1], 0),
            ],
            CZ => vec![
                w(&[1, 0], &[0, 1], 0),
                w(&[0, 0], &[1, 0], 0),
                w(&[0, 1], &[1, 0], 0),
                w(&[0, 0], &[0, 1], 0),
            ],
            CZdag => vec![
                w(&[1, 0], &[0, -1], 0),
                w(&[0, 0], &[1, 0], 0),
                w(&[0, 1], &[-1, 0], 0),
                w(&[0, 0], &[0, 1], 0),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGate", into = "RawGate")]
pub struct CliffordGate {
    kind: GateKind,
    targets: [usize; 2],
}

#[derive(Serialize, Deserialize)]
struct RawGate {
    kind: GateKind,
    targets: Vec<usize>,
}

impl TryFrom<RawGate> for CliffordGate {
    type Error = Error;
    fn try_from(r: RawGate) -> Result<Self> {
        CliffordGate::new(r.kind, &r.targets)
    }
}

impl From<CliffordGate> for RawGate {
    fn from(g: CliffordGate) -> Self {
        RawGate { kind: g.kind, targets: g.targets().to_vec() }
    }
}

impl CliffordGate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidTargets(format!(
                "{} takes {} target(s), got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        if kind.arity() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidTargets(format!(
                "{} control and target coincide ({})",
                kind.name(),
                targets[0]
            )));
        }
        let t1 = if kind.arity() == 2 { targets[1] } else { usize::MAX };
        Ok(CliffordGate { kind, targets: [targets[0], t1] })
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        assert_eq!(kind.arity(), 1);
        CliffordGate { kind, targets: [q, usize::MAX] }
    }

    pub fn two(kind: GateKind, control: usize, target: usize) -> Self {
        CliffordGate::new(kind, &[control, target]).expect("invalid two-qudit gate")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }

    pub fn inverse(&self) -> CliffordGate {
        CliffordGate { kind: self.kind.inverse(), targets: self.targets }
    }

    pub fn max_target(&self) -> usize {
        *self.targets().iter().max().unwrap()
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        for &t in self.targets() {
            if t >= n {
                return Err(Error::TargetOutOfRange { index: t, n });
            }
        }
        Ok(())
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.targets() {
            [q] => write!(f, "{} q{}", self.kind.name(), q),
            [c, t] => write!(f, "{} q{},q{}", self.kind.name(), c, t),
            _ => unreachable!(),
        }
    }
}

/// Precomputed images of every local Weyl pattern under one gate kind.
///
/// One-qudit entries are indexed `a·d + b` for `X^a Z^b`; two-qudit entries by
/// `((xc·d + zc)·d + xt)·d + zt`. Each entry stores the image exponents
/// (same layout) and the phase it contributes.
#[derive(Debug)]
pub struct LocalTable {
    pub arity: usize,
    pub x: Vec<[u8; 2]>,
    pub z: Vec<[u8; 2]>,
    pub phase: Vec<u8>,
}

#[derive(Debug)]
pub struct ConjugationTables {
    d: u8,
    tables: Vec<LocalTable>,
}

impl ConjugationTables {
    fn build(d: u8) -> Self {
        let tables = GateKind::ALL.iter().map(|&k| build_table(k, d)).collect();
        ConjugationTables { d, tables }
    }

    /// Shared tables for dimension `d`, built once per process.
    pub fn for_dim(d: u32) -> Result<Arc<ConjugationTables>> {
        static CACHE: OnceLock<Mutex<HashMap<u8, Arc<ConjugationTables>>>> = OnceLock::new();
        let d = check_dim(d)?;
        let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
        Ok(cache.entry(d).or_insert_with(|| Arc::new(ConjugationTables::build(d))).clone())
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn table(&self, kind: GateKind) -> &LocalTable {
        &self.tables[kind as usize]
    }

    /// Conjugates the slices of a single operator in place; returns the phase increment.
    #[inline]
    pub(crate) fn apply(&self, g: &CliffordGate, x: &mut [u8], z: &mut [u8]) -> u8 {
        let d = self.d as usize;
        let t = self.table(g.kind);
        match g.targets() {
            &[q] => {
                let idx = x[q] as usize * d + z[q] as usize;
                x[q] = t.x[idx][0];
                z[q] = t.z[idx][0];
                t.phase[idx]
            }
            &[c, q] => {
                let idx = ((x[c] as usize * d + z[c] as usize) * d + x[q] as usize) * d
                    + z[q] as usize;
                x[c] = t.x[idx][0];
                z[c] = t.z[idx][0];
                x[q] = t.x[idx][1];
                z[q] = t.z[idx][1];
                t.phase[idx]
            }
            _ => unreachable!(),
        }
    }
}

fn build_table(kind: GateKind, d: u8) -> LocalTable {
    let images = kind.generator_images(d as u32);
    let arity = kind.arity();
    let size = (d as usize).pow(2 * arity as u32);
    let mut t = LocalTable {
        arity,
        x: Vec::with_capacity(size),
        z: Vec::with_capacity(size),
        phase: Vec::with_capacity(size),
    };
    for idx in 0..size {
        // digits most-significant first: (x0, z0[, x1, z1])
        let mut digits = vec![0i64; 2 * arity];
        let mut r = idx;
        for k in (0..2 * arity).rev() {
            digits[k] = (r % d as usize) as i64;
            r /= d as usize;
        }
        // Original operator is ∏_sites X^a Z^b; image = ∏ img(X)^a img(Z)^b in the same order.
        let mut acc = WeylOp::identity(d as u32, arity).unwrap();
        for (k, &e) in digits.iter().enumerate() {
            acc = acc.compose_unchecked(&images[k].pow(e));
        }
        let mut xs = [0u8; 2];
        let mut zs = [0u8; 2];
        for s in 0..arity {
            xs[s] = acc.x[s];
            zs[s] = acc.z[s];
        }
        t.x.push(xs);
        t.z.push(zs);
        t.phase.push(acc.phase);
    }
    t
}

/// `g · w · g†` exactly, including the phase exponent.
pub fn conjugate_by_gate(g: &CliffordGate, w: &WeylOp) -> Result<WeylOp> {
    g.check_range(w.n())?;
    let tables = ConjugationTables::for_dim(w.d())?;
    let mut out = w.clone();
    let dp = tables.apply(g, &mut out.x, &mut out.z);
    out.phase = add(out.phase, dp, out.d);
    Ok(out)
}

/// Conjugates through a whole gate list in order (`U = g_k ⋯ g_1`).
pub fn conjugate_by_gates(gates: &[CliffordGate], w: &WeylOp) -> Result<WeylOp> {
    let tables = ConjugationTables::for_dim(w.d())?;
    let mut out = w.clone();
    for g in gates {
        g.check_range(w.n())?;
        let dp = tables.apply(g, &mut out.x, &mut out.z);
        out.phase = add(out.phase, dp, out.d);
    }
    Ok(out)
}

/// Conjugation by a Weyl operator: `V W V† = ω^{−sp(V,W)} W`.
pub fn conjugate_by_weyl(v: &WeylOp, w: &WeylOp) -> Result<WeylOp> {
    let s = v.symplectic_product(w)?;
    Ok(w.clone().times_omega(-(s as i64)))
}

/// Exponent `k` with `a = ω^k·b` when the two share the same Pauli part.
pub fn relative_phase(a: &WeylOp, b: &WeylOp) -> Option<u8> {
    if a.d != b.d || !a.same_pauli(b) {
        return None;
    }
    Some(sub(a.phase, b.phase, a.d))
}

/// Negated exponent vector helper used by string constructions.
pub fn neg_exp(v: u8, d: u8) -> u8 {
    neg(v, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> WeylOp {
        WeylOp::x_on(3, 1, 0).unwrap()
    }
    fn z1() -> WeylOp {
        WeylOp::z_on(3, 1, 0).unwrap()
    }

    #[test]
    fn compose_normal_order() {
        let xz = x1().compose(&z1()).unwrap();
        assert_eq!((xz.x_exp()[0], xz.z_exp()[0], xz.phase()), (1, 1, 0));
        let zx = z1().compose(&x1()).unwrap();
        assert_eq!((zx.x_exp()[0], zx.z_exp()[0], zx.phase()), (1, 1, 1));
    }

    #[test]
    fn sp_x_z() {
        // X·Z = ω^{-1} Z·X
        assert_eq!(x1().symplectic_product(&z1()).unwrap(), 1);
        assert_eq!(z1().symplectic_product(&x1()).unwrap(), 2);
        let xz = x1().compose(&z1()).unwrap();
        let zx = z1().compose(&x1()).unwrap();
        assert_eq!(xz, zx.times_omega(-1));
    }

    #[test]
    fn rejects_even_and_composite() {
        assert!(WeylOp::identity(2, 1).is_err());
        assert!(WeylOp::identity(9, 1).is_err());
        assert!(WeylOp::identity(5, 1).is_ok());
    }

    #[test]
    fn mismatches() {
        let a = WeylOp::identity(3, 2).unwrap();
        let b = WeylOp::identity(3, 3).unwrap();
        let c = WeylOp::identity(5, 2).unwrap();
        assert!(matches!(a.compose(&b), Err(Error::ArityMismatch { .. })));
        assert!(matches!(a.compose(&c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pow_matches_repeated_compose() {
        let w = WeylOp::from_signed(5, &[1, 3], &[2, 4], 1).unwrap();
        let mut acc = WeylOp::identity(5, 2).unwrap();
        for k in 0..7 {
            assert_eq!(w.pow(k), acc, "k = {k}");
            acc = acc.compose(&w).unwrap();
        }
        assert!(w.pow(5).is_identity());
        assert!(w.compose(&w.inverse()).unwrap().is_identity());
    }

    #[test]
    fn charge_conjugation_inverts() {
        let g = CliffordGate::one(GateKind::Conj, 0);
        let img = conjugate_by_gate(&g, &x1()).unwrap();
        assert_eq!(img, x1().inverse());
        assert_eq!(img.phase(), 0);
    }

    #[test]
    fn gate_validation() {
        assert!(CliffordGate::new(GateKind::CX, &[1, 1]).is_err());
        assert!(CliffordGate::new(GateKind::Fourier, &[0, 1]).is_err());
        let g = CliffordGate::new(GateKind::CZ, &[0, 4]).unwrap();
        assert!(conjugate_by_gate(&g, &WeylOp::identity(3, 3).unwrap()).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let w = WeylOp::from_signed(3, &[1, -1], &[0, 2], 2).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: WeylOp = serde_json::from_str(&s).unwrap();
        assert_eq!(w, back);
        let g = CliffordGate::two(GateKind::CXdag, 3, 1);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"kind":"CXdag","targets":[3,1]}"#);
        assert_eq!(serde_json::from_str::<CliffordGate>(&s).unwrap(), g);
    }
}
