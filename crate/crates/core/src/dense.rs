//! Reference statevector simulator for small registers.
//!
//! Basis index convention: site 0 is the least significant digit, so
//! `|j_0 j_1 …⟩ ↦ Σ_i j_i d^i`. Any local dimension `d ≥ 2` is accepted, which
//! lets the same code check qutrit circuits and their two-qubit encodings.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use std::collections::BTreeMap;

use crate::circuit::{Circuit, Instruction, NoiseEvent};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::weyl::{CliffordGate, GateKind, WeylOp};

/// Largest state vector the oracle will allocate (2^20 amplitudes).
pub const MAX_AMPLITUDES: usize = 1 << 20;

pub fn omega(d: u32, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(d as i64)) as f64 / d as f64)
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = CMatrix::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            m.data[i * dim..(i + 1) * dim].copy_from_slice(r);
        }
        m
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect()).collect();
        CMatrix::from_rows(&rows)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|&v| v * s).collect() }
    }

    /// `self ⊗ other` with `other` on the less significant digits.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.dim, other.dim);
        let mut out = CMatrix::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                let s = self.data[i * a + j];
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * (a * b) + j * b + l] = s * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Max entrywise deviation after aligning the global phase on the largest entry.
    pub fn max_diff_up_to_phase(&self, other: &CMatrix) -> f64 {
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        if self.data[idx].norm() < 1e-14 {
            return f64::INFINITY;
        }
        let ph = other.data[idx] / self.data[idx];
        let ph = ph / ph.norm();
        self.scale(ph).max_abs_diff(other)
    }

    pub fn unitarity_error(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&CMatrix::identity(self.dim))
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }
}

/// Dense matrix of a Clifford gate on its local 1- or 2-qudit space (control = site 0).
pub fn gate_matrix(kind: GateKind, d: u32) -> CMatrix {
    let du = d as usize;
    let one = Complex64::new(1.0, 0.0);
    let single = |f: &dyn Fn(usize, usize) -> Complex64| {
        let mut m = CMatrix::zeros(du);
        for r in 0..du {
            for c in 0..du {
                m.set(r, c, f(r, c));
            }
        }
        m
    };
    let zero = Complex64::new(0.0, 0.0);
    let sel = |cond: bool, v: Complex64| if cond { v } else { zero };
    use GateKind::*;
    match kind {
        ShiftX => single(&|r, c| sel(r == (c + 1) % du, one)),
        ShiftXdag => single(&|r, c| sel((r + 1) % du == c, one)),
        ClockZ => single(&|r, c| sel(r == c, omega(d, c as i64))),
        ClockZdag => single(&|r, c| sel(r == c, omega(d, -(c as i64)))),
        Conj => single(&|r, c| sel(r == (du - c) % du, one)),
        Fourier => single(&|r, c| omega(d, (r * c) as i64) / (du as f64).sqrt()),
        FourierDag => single(&|r, c| omega(d, -((r * c) as i64)) / (du as f64).sqrt()),
        CX | CXdag | CZ | CZdag => {
            // local index = control + d·target
            let mut m = CMatrix::zeros(du * du);
            for c in 0..du {
                for t in 0..du {
                    let col = c + du * t;
                    let (row, ph) = match kind {
                        CX => (c + du * ((t + c) % du), one),
                        CXdag => (c + du * ((t + du - c) % du), one),
                        CZ => (col, omega(d, (c * t) as i64)),
                        _ => (col, omega(d, -((c * t) as i64))),
                    };
                    m.set(row, col, ph);
                }
            }
            m
        }
    }
}

/// Dense matrix of a Weyl operator (small n only).
pub fn weyl_matrix(w: &WeylOp) -> Result<CMatrix> {
    let dim = checked_dim(w.d(), w.n())?;
    let mut m = CMatrix::zeros(dim);
    for col in 0..dim {
        let (row, ph) = weyl_action(w, col);
        m.set(row, col, ph);
    }
    Ok(m)
}

fn checked_dim(d: u32, n: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.checked_mul(d as usize).ok_or(Error::SizeOverflow(usize::MAX))?;
        if dim > MAX_AMPLITUDES {
            return Err(Error::SizeOverflow(dim));
        }
    }
    Ok(dim)
}

/// Image of basis state `col` under `w`: returns (row, coefficient).
#[inline]
fn weyl_action(w: &WeylOp, col: usize) -> (usize, Complex64) {
    let d = w.d() as usize;
    let mut rest = col;
    let mut row = 0usize;
    let mut place = 1usize;
    let mut k = w.phase() as i64;
    for i in 0..w.n() {
        let j = rest % d;
        rest /= d;
        let (a, b) = w.site(i);
        k += b as i64 * j as i64;
        row += ((j + a as usize) % d) * place;
        place *= d;
    }
    (row, omega(w.d(), k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    d: u32,
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0…0⟩` on n sites of local dimension d.
    pub fn zero(d: u32, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let dim = checked_dim(d, n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { d, n, amps })
    }

    pub fn basis(d: u32, digits: &[usize]) -> Result<Self> {
        let mut s = DenseState::zero(d, digits.len())?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        let idx = digits.iter().rev().fold(0usize, |acc, &j| acc * d as usize + j);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(d: u32, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let dim = checked_dim(d, n)?;
        if amps.len() != dim {
            return Err(Error::InvalidArgument(format!("expected {dim} amplitudes")));
        }
        let mut s = DenseState { d, n, amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm < 1e-300 {
            return Err(Error::InvalidArgument("zero state".into()));
        }
        for a in self.amps.iter_mut() {
            *a /= nrm;
        }
        Ok(())
    }

    /// Applies a local matrix on the given sites (first site = least significant local digit).
    pub fn apply_matrix(&mut self, m: &CMatrix, sites: &[usize]) -> Result<()> {
        let d = self.d as usize;
        let k = sites.len();
        if d.pow(k as u32) != m.dim {
            return Err(Error::InvalidArgument("matrix size does not match sites".into()));
        }
        for &s in sites {
            if s >= self.n {
                return Err(Error::TargetOutOfRange { index: s, n: self.n });
            }
        }
        let strides: Vec<usize> = sites.iter().map(|&s| d.pow(s as u32)).collect();
        let local = m.dim;
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                let mut r = l;
                let mut off = 0;
                for st in &strides {
                    off += (r % d) * st;
                    r /= d;
                }
                off
            })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); local];
        for base in 0..self.amps.len() {
            if strides.iter().any(|&st| (base / st) % d != 0) {
                continue;
            }
            for l in 0..local {
                buf[l] = self.amps[base + offsets[l]];
            }
            for r in 0..local {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..local {
                    acc += m.data[r * local + c] * buf[c];
                }
                self.amps[base + offsets[r]] = acc;
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<()> {
        let m = gate_matrix(g.kind(), self.d);
        self.apply_matrix(&m, g.targets())
    }

    pub fn apply_weyl(&mut self, w: &WeylOp) -> Result<()> {
        self.check_weyl(w)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (col, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (row, ph) = weyl_action(w, col);
            out[row] += ph * a;
        }
        self.amps = out;
        Ok(())
    }

    fn check_weyl(&self, w: &WeylOp) -> Result<()> {
        if w.d() != self.d {
            return Err(Error::DimensionMismatch { left: self.d, right: w.d() });
        }
        if w.n() != self.n {
            return Err(Error::ArityMismatch { left: self.n, right: w.n() });
        }
        Ok(())
    }

    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.amps.len() != other.amps.len() || self.d != other.d {
            return Err(Error::ArityMismatch { left: self.n, right: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn expectation(&self, w: &WeylOp) -> Result<Complex64> {
        let mut t = self.clone();
        t.apply_weyl(w)?;
        self.inner(&t)
    }

    /// Unnormalized projection onto the ω^s eigenspace of `w`.
    pub fn project(&self, w: &WeylOp, s: u32) -> Result<DenseState> {
        self.check_weyl(w)?;
        w.check_unit_order()?;
        let d = self.d as i64;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut cur = self.clone();
        for k in 0..d {
            let c = omega(self.d, -(s as i64) * k) / d as f64;
            for (a, b) in acc.iter_mut().zip(&cur.amps) {
                *a += c * b;
            }
            cur.apply_weyl(w)?;
        }
        Ok(DenseState { d: self.d, n: self.n, amps: acc })
    }

    /// Born-rule probabilities of each outcome s (eigenvalue ω^s).
    pub fn outcome_probabilities(&self, w: &WeylOp) -> Result<Vec<f64>> {
        (0..self.d).map(|s| Ok(self.project(w, s)?.norm().powi(2))).collect()
    }

    pub fn measure_projective<R: Rng + ?Sized>(
        &self,
        w: &WeylOp,
        rng: &mut R,
    ) -> Result<(u32, DenseState)> {
        let probs = self.outcome_probabilities(w)?;
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = probs.iter().rposition(|&p| p > 1e-12).unwrap_or(0);
        for (s, &p) in probs.iter().enumerate() {
            acc += p;
            if r < acc && p > 1e-12 {
                pick = s;
                break;
            }
        }
        let mut post = self.project(w, pick as u32)?;
        post.normalize()?;
        Ok((pick as u32, post))
    }

    pub fn fidelity(&self, target: &DenseState) -> Result<f64> {
        Ok(self.inner(target)?.norm_sqr())
    }

    pub fn norm_error(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }
}

pub fn fidelity(state: &DenseState, target: &DenseState) -> Result<f64> {
    state.fidelity(target)
}

/// Dense vector of the state stabilized by `t` (global phase arbitrary).
pub fn from_tableau(t: &StabilizerTableau) -> Result<DenseState> {
    let d = t.d();
    let n = t.n();
    let dim = checked_dim(d, n)?;
    let stabs = t.stabilizers();
    for b in 0..dim {
        let mut v = DenseState::zero(d, n)?;
        v.amps[0] = Complex64::new(0.0, 0.0);
        v.amps[b] = Complex64::new(1.0, 0.0);
        for s in &stabs {
            v = v.project(s, 0)?;
        }
        if v.norm() > 1e-6 {
            v.normalize()?;
            return Ok(v);
        }
    }
    Err(Error::Invariant("stabilizer group has no joint +1 eigenvector".into()))
}

/// Exact joint distribution of (register values, herald flag) for a circuit,
/// by enumerating every measurement and noise branch.
pub fn circuit_distribution(c: &Circuit) -> Result<BTreeMap<(Vec<u8>, bool), f64>> {
    c.validate()?;
    struct Branch {
        state: DenseState,
        cregs: Vec<u8>,
        herald: bool,
        p: f64,
    }
    let mut branches = vec![Branch {
        state: DenseState::zero(c.d(), c.n_qudits())?,
        cregs: vec![0; c.n_cregs()],
        herald: false,
        p: 1.0,
    }];
    for ins in c.instructions() {
        match ins {
            Instruction::Gate(g) => {
                for b in branches.iter_mut() {
                    b.state.apply_gate(g)?;
                }
            }
            Instruction::Barrier => {}
            Instruction::CondGate { creg, branches: bs } => {
                for b in branches.iter_mut() {
                    for g in &bs[b.cregs[*creg] as usize] {
                        b.state.apply_gate(g)?;
                    }
                }
            }
            Instruction::Measure { observable, creg } => {
                let mut next = Vec::new();
                for b in branches {
                    for s in 0..c.d() {
                        let mut post = b.state.project(observable, s)?;
                        let q = post.norm().powi(2);
                        if q < 1e-12 {
                            continue;
                        }
                        post.normalize()?;
                        let mut cregs = b.cregs.clone();
                        cregs[*creg] = s as u8;
                        next.push(Branch { state: post, cregs, herald: b.herald, p: b.p * q });
                    }
                }
                branches = next;
            }
            Instruction::Noise { channel, sites } => {
                let events = channel.enumerate(c.d(), sites.len());
                let mut next = Vec::new();
                for b in branches {
                    for (q, ev) in &events {
                        if *q <= 0.0 {
                            continue;
                        }
                        let mut st = b.state.clone();
                        let mut herald = b.herald;
                        match ev {
                            NoiseEvent::None => {}
                            NoiseEvent::Leak => herald = true,
                            NoiseEvent::Weyl(labels) => {
                                let mut w = WeylOp::identity(c.d(), c.n_qudits())?;
                                for (&s, &(a, bb)) in sites.iter().zip(labels) {
                                    w.set_site(s, a, bb);
                                }
                                st.apply_weyl(&w)?;
                            }
                        }
                        next.push(Branch { state: st, cregs: b.cregs.clone(), herald, p: b.p * q });
                    }
                }
                branches = next;
            }
        }
    }
    let mut out = BTreeMap::new();
    for b in branches {
        *out.entry((b.cregs, b.herald)).or_insert(0.0) += b.p;
    }
    Ok(out)
}
