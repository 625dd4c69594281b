//! Pure-state stabilizer tableau over Z_d with destabilizers.
//!
//! Rows `0..n` hold destabilizers, rows `n..2n` stabilizers. Exponents are
//! stored row-major in flat buffers so that gate updates touch two columns.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::omega;
use crate::error::{Error, Result};
use crate::modular::{self, add, inv, mul, neg, sub};
use crate::weyl::{check_dim, sp_slices, CliffordGate, ConjugationTables, WeylOp};

/// Invariants are re-checked after every random measurement in debug builds up to this size.
/// Gate updates are table lookups verified exhaustively against dense matrices.
const DEBUG_CHECK_MAX_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub value: u8,
    pub deterministic: bool,
}

/// Expectation value of a Weyl operator on a stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expectation {
    Zero,
    /// ω^k
    Root(u8),
}

impl Expectation {
    pub fn to_complex(self, d: u32) -> Complex64 {
        match self {
            Expectation::Zero => Complex64::new(0.0, 0.0),
            Expectation::Root(k) => omega(d, k as i64),
        }
    }

    pub fn root(self) -> Option<u8> {
        match self {
            Expectation::Zero => None,
            Expectation::Root(k) => Some(k),
        }
    }
}

#[derive(Clone)]
pub struct StabilizerTableau {
    d: u8,
    n: usize,
    x: Vec<u8>,
    z: Vec<u8>,
    phase: Vec<u8>,
    tables: Arc<ConjugationTables>,
    rng: ChaCha8Rng,
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "StabilizerTableau(d={}, n={})", self.d, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  S{}: {}", i, self.stabilizer(i))?;
        }
        Ok(())
    }
}

impl StabilizerTableau {
    /// `|0⟩^⊗n`: stab_i = Z_i, destab_i = X_i.
    pub fn new_computational(d: u32, n: usize) -> Result<Self> {
        let dd = check_dim(d)?;
        if n == 0 {
            return Err(Error::InvalidArgument("tableau needs at least one qudit".into()));
        }
        let mut x = vec![0u8; 2 * n * n];
        let mut z = vec![0u8; 2 * n * n];
        for i in 0..n {
            x[i * n + i] = 1;
            z[(n + i) * n + i] = 1;
        }
        Ok(StabilizerTableau {
            d: dd,
            n,
            x,
            z,
            phase: vec![0; 2 * n],
            tables: ConjugationTables::for_dim(d)?,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn d(&self) -> u32 {
        self.d as u32
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row_op(&self, r: usize) -> WeylOp {
        let n = self.n;
        WeylOp::from_parts(
            self.d as u32,
            self.x[r * n..(r + 1) * n].to_vec(),
            self.z[r * n..(r + 1) * n].to_vec(),
            self.phase[r],
        )
        .expect("tableau rows are valid")
    }

    pub fn stabilizer(&self, i: usize) -> WeylOp {
        self.row_op(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> WeylOp {
        self.row_op(i)
    }

    pub fn stabilizers(&self) -> Vec<WeylOp> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<WeylOp> {
        (0..self.n).map(|i| self.destabilizer(i)).collect()
    }

    fn check_op(&self, w: &WeylOp) -> Result<()> {
        if w.d() != self.d as u32 {
            return Err(Error::DimensionMismatch { left: self.d as u32, right: w.d() });
        }
        if w.n() != self.n {
            return Err(Error::ArityMismatch { left: self.n, right: w.n() });
        }
        Ok(())
    }

    #[inline]
    fn sp_row(&self, r: usize, w: &WeylOp) -> u8 {
        let n = self.n;
        sp_slices(
            &self.x[r * n..(r + 1) * n],
            &self.z[r * n..(r + 1) * n],
            w.x_exp(),
            w.z_exp(),
            self.d,
        )
    }

    fn sp_rows(&self, a: usize, b: usize) -> u8 {
        let n = self.n;
        sp_slices(
            &self.x[a * n..(a + 1) * n],
            &self.z[a * n..(a + 1) * n],
            &self.x[b * n..(b + 1) * n],
            &self.z[b * n..(b + 1) * n],
            self.d,
        )
    }

    /// Row `dst` ← row `dst` · (row `src`)^m, with exact phase.
    fn row_mul_pow(&mut self, dst: usize, src: usize, m: u8) {
        if m == 0 {
            return;
        }
        let (n, d) = (self.n, self.d);
        let d32 = d as u32;
        let tri = ((m as u32 * (m as u32 - 1) / 2) % d32) as u8;
        let mut cross = 0u32;
        let mut reorder = 0u32;
        for i in 0..n {
            let (sx, sz) = (self.x[src * n + i], self.z[src * n + i]);
            cross += sx as u32 * sz as u32;
            let px = mul(sx, m, d);
            let pz = mul(sz, m, d);
            reorder += self.z[dst * n + i] as u32 * px as u32;
            self.x[dst * n + i] = add(self.x[dst * n + i], px, d);
            self.z[dst * n + i] = add(self.z[dst * n + i], pz, d);
        }
        let pow_phase =
            (mul(self.phase[src], m, d) as u32 + (cross % d32) * tri as u32) % d32;
        self.phase[dst] = ((self.phase[dst] as u32 + pow_phase + reorder) % d32) as u8;
    }

    fn set_row(&mut self, r: usize, w: &WeylOp) {
        let n = self.n;
        self.x[r * n..(r + 1) * n].copy_from_slice(w.x_exp());
        self.z[r * n..(r + 1) * n].copy_from_slice(w.z_exp());
        self.phase[r] = w.phase();
    }

    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<()> {
        g.check_range(self.n)?;
        let n = self.n;
        for r in 0..2 * n {
            let dp = self.tables.apply(g, &mut self.x[r * n..(r + 1) * n], &mut self.z[r * n..(r + 1) * n]);
            self.phase[r] = add(self.phase[r], dp, self.d);
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[CliffordGate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Applies a Weyl operator as a unitary: rows pick up ω^{−sp(W,S)}.
    pub fn apply_weyl(&mut self, w: &WeylOp) -> Result<()> {
        self.check_op(w)?;
        for r in 0..2 * self.n {
            let s = self.sp_row(r, w);
            if s != 0 {
                // sp(W, row) = −sp(row, W)
                self.phase[r] = add(self.phase[r], s, self.d);
            }
        }
        Ok(())
    }

    /// Outcome of measuring `w` if it is deterministic, without touching the state.
    pub fn deterministic_outcome(&self, w: &WeylOp) -> Result<Option<u8>> {
        self.check_op(w)?;
        if (self.n..2 * self.n).any(|r| self.sp_row(r, w) != 0) {
            return Ok(None);
        }
        Ok(Some(self.group_phase(w)?))
    }

    /// For `w` commuting with every stabilizer, the k with ω^{−k}·w in the group.
    fn group_phase(&self, w: &WeylOp) -> Result<u8> {
        let (n, d) = (self.n, self.d);
        let mut px = vec![0u8; n];
        let mut pz = vec![0u8; n];
        let mut pphase = 0u32;
        let d32 = d as u32;
        for j in 0..n {
            let c = self.sp_row(j, w);
            if c == 0 {
                continue;
            }
            let src = n + j;
            let tri = ((c as u32 * (c as u32 - 1) / 2) % d32) as u8;
            let mut cross = 0u32;
            let mut reorder = 0u32;
            for i in 0..n {
                let (sx, sz) = (self.x[src * n + i], self.z[src * n + i]);
                cross += sx as u32 * sz as u32;
                let ax = mul(sx, c, d);
                reorder += pz[i] as u32 * ax as u32;
                px[i] = add(px[i], ax, d);
                pz[i] = add(pz[i], mul(sz, c, d), d);
            }
            pphase += mul(self.phase[src], c, d) as u32 + (cross % d32) * tri as u32 + reorder;
            pphase %= d32;
        }
        if px != w.x_exp() || pz != w.z_exp() {
            return Err(Error::Invariant("operator commutes with the group but is not in it".into()));
        }
        Ok(sub(w.phase(), pphase as u8, d))
    }

    pub fn measure_weyl(&mut self, w: &WeylOp) -> Result<MeasurementOutcome> {
        self.measure_inner(w, None)
    }

    /// Measures `w`, forcing the outcome if it is random. Forcing a deterministic
    /// measurement to a different value is an error (probability zero branch).
    pub fn measure_weyl_forced(&mut self, w: &WeylOp, outcome: u8) -> Result<MeasurementOutcome> {
        if outcome >= self.d {
            return Err(Error::InvalidArgument(format!("outcome {outcome} out of range")));
        }
        self.measure_inner(w, Some(outcome))
    }

    fn measure_inner(&mut self, w: &WeylOp, forced: Option<u8>) -> Result<MeasurementOutcome> {
        self.check_op(w)?;
        w.check_unit_order()?;
        let n = self.n;
        let d = self.d;
        let Some(p) = (n..2 * n).find(|&r| self.sp_row(r, w) != 0) else {
            let value = self.group_phase(w)?;
            if let Some(f) = forced {
                if f != value {
                    return Err(Error::InvalidArgument(format!(
                        "forced outcome {f} has probability zero (deterministic {value})"
                    )));
                }
            }
            return Ok(MeasurementOutcome { value, deterministic: true });
        };
        let t = self.sp_row(p, w);
        let tinv = inv(t, d);
        for r in 0..2 * n {
            if r == p {
                continue;
            }
            let u = self.sp_row(r, w);
            if u != 0 {
                // make row commute with w: r · S_p^{−u/t}
                let m = neg(mul(u, tinv, d), d);
                self.row_mul_pow(r, p, m);
            }
        }
        // new destabilizer of slot p: old S_p^{1/t}
        let dst = p - n;
        let old = self.row_op(p).pow(tinv as i64);
        self.set_row(dst, &old);
        let value = match forced {
            Some(f) => f,
            None => self.rng.gen_range(0..d),
        };
        let new = w.clone().times_omega(-(value as i64));
        self.set_row(p, &new);
        self.debug_check();
        Ok(MeasurementOutcome { value, deterministic: false })
    }

    /// ⟨w⟩ ∈ {0} ∪ {ω^k}.
    pub fn expectation_weyl(&self, w: &WeylOp) -> Result<Expectation> {
        Ok(match self.deterministic_outcome(w)? {
            Some(k) => Expectation::Root(k),
            None => Expectation::Zero,
        })
    }

    pub fn expectation_complex(&self, w: &WeylOp) -> Result<Complex64> {
        Ok(self.expectation_weyl(w)?.to_complex(self.d as u32))
    }

    /// Same as [`expectation_weyl`](Self::expectation_weyl) but solved by Gaussian
    /// elimination over the stabilizer exponent vectors, ignoring destabilizers.
    pub fn expectation_weyl_gauss(&self, w: &WeylOp) -> Result<Expectation> {
        self.check_op(w)?;
        let (n, d) = (self.n, self.d);
        // Unknowns c_j; equations: Σ_j c_j v_j = v_w over 2n coordinates.
        let mut rows: Vec<Vec<u8>> = (0..2 * n)
            .map(|coord| {
                let mut row = Vec::with_capacity(n + 1);
                for j in 0..n {
                    let r = n + j;
                    row.push(if coord < n { self.x[r * n + coord] } else { self.z[r * n + coord - n] });
                }
                row.push(if coord < n { w.x_exp()[coord] } else { w.z_exp()[coord - n] });
                row
            })
            .collect();
        let pivots = modular::row_reduce(&mut rows, d);
        if pivots.contains(&n) {
            return Ok(Expectation::Zero);
        }
        let mut coeff = vec![0u8; n];
        for (ri, &pc) in pivots.iter().enumerate() {
            coeff[pc] = rows[ri][n];
        }
        let mut acc = WeylOp::identity(d as u32, n)?;
        for (j, &c) in coeff.iter().enumerate() {
            if c != 0 {
                acc = acc.compose_unchecked(&self.stabilizer(j).pow(c as i64));
            }
        }
        if !acc.same_pauli(w) {
            return Ok(Expectation::Zero);
        }
        Ok(Expectation::Root(sub(w.phase(), acc.phase(), d)))
    }

    /// ⟨Π^α⟩ with α = ω^a: (1/d) Σ_k ω^{−ak} ⟨w^k⟩, the projector onto ⟨w⟩ = ω^a.
    pub fn projector_expectation(&self, w: &WeylOp, a: u8) -> Result<f64> {
        if a >= self.d {
            return Err(Error::InvalidArgument(format!("α = ω^{a} is not a {}-th root label", self.d)));
        }
        Ok(projector_value(self.expectation_weyl(w)?, a, self.d as u32))
    }

    /// (⟨Π^1⟩, ⟨Π^ω⟩, …, ⟨Π^{ω^{d−1}}⟩).
    pub fn projector_family(&self, w: &WeylOp) -> Result<Vec<f64>> {
        let e = self.expectation_weyl(w)?;
        Ok((0..self.d).map(|a| projector_value(e, a, self.d as u32)).collect())
    }

    /// True when both tableaus stabilize the same state (same group including phases).
    pub fn same_state(&self, other: &StabilizerTableau) -> Result<bool> {
        if other.n != self.n || other.d != self.d {
            return Ok(false);
        }
        for s in other.stabilizers() {
            if self.expectation_weyl(&s)? != Expectation::Root(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn debug_check(&self) {
        if cfg!(debug_assertions) && self.n <= DEBUG_CHECK_MAX_N {
            if let Err(e) = self.check_invariants() {
                panic!("tableau invariant broken: {e}");
            }
        }
    }

    /// Commutation, canonical pairing and independence of the generators.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if self.sp_rows(n + i, n + j) != 0 {
                    return Err(Error::Invariant(format!("stabilizers {i},{j} do not commute")));
                }
                if self.sp_rows(i, j) != 0 {
                    return Err(Error::Invariant(format!("destabilizers {i},{j} do not commute")));
                }
                let want = u8::from(i == j);
                if self.sp_rows(i, n + j) != want {
                    return Err(Error::Invariant(format!("pairing broken at ({i},{j})")));
                }
            }
        }
        // pairing already implies independence; check rank anyway for clarity
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|j| {
                let r = n + j;
                let mut v = self.x[r * n..(r + 1) * n].to_vec();
                v.extend_from_slice(&self.z[r * n..(r + 1) * n]);
                v
            })
            .collect();
        if modular::rank(&rows, self.d) != n {
            return Err(Error::Invariant("stabilizers are dependent".into()));
        }
        Ok(())
    }
}

/// ⟨Π^{ω^a}⟩ from ⟨w⟩: exact values in {0, 1/d, 1}.
pub fn projector_value(e: Expectation, a: u8, d: u32) -> f64 {
    match e {
        Expectation::Zero => 1.0 / d as f64,
        Expectation::Root(k) if k == a => 1.0,
        Expectation::Root(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::GateKind;

    #[test]
    fn computational_state() {
        let t = StabilizerTableau::new_computational(3, 1).unwrap();
        let z = WeylOp::z_on(3, 1, 0).unwrap();
        let mut t2 = t.clone();
        assert_eq!(t2.measure_weyl(&z).unwrap(), MeasurementOutcome { value: 0, deterministic: true });
        let t5 = StabilizerTableau::new_computational(5, 3).unwrap();
        for s in 0..3 {
            assert_eq!(t5.expectation_weyl(&WeylOp::x_on(5, 3, s).unwrap()).unwrap(), Expectation::Zero);
        }
    }

    #[test]
    fn hadamard_gives_plus() {
        let mut t = StabilizerTableau::new_computational(3, 1).unwrap();
        t.apply_gate(&CliffordGate::one(GateKind::Fourier, 0)).unwrap();
        let x = WeylOp::x_on(3, 1, 0).unwrap();
        assert_eq!(t.expectation_weyl(&x).unwrap(), Expectation::Root(0));
    }

    #[test]
    fn cx_on_plus_zero() {
        let mut t = StabilizerTableau::new_computational(3, 2).unwrap();
        t.apply_gate(&CliffordGate::one(GateKind::Fourier, 0)).unwrap();
        t.apply_gate(&CliffordGate::two(GateKind::CX, 0, 1)).unwrap();
        let xx = WeylOp::from_signed(3, &[1, 1], &[0, 0], 0).unwrap();
        let zz = WeylOp::from_signed(3, &[0, 0], &[-1, 1], 0).unwrap();
        assert_eq!(t.expectation_weyl(&xx).unwrap(), Expectation::Root(0));
        assert_eq!(t.expectation_weyl(&zz).unwrap(), Expectation::Root(0));
    }

    #[test]
    fn repeated_measurement_stable() {
        let mut t = StabilizerTableau::new_computational(3, 2).unwrap().with_seed(9);
        let xz = WeylOp::from_signed(3, &[1, 0], &[1, 0], 0).unwrap();
        let first = t.measure_weyl(&xz).unwrap();
        assert!(!first.deterministic);
        for _ in 0..5 {
            let again = t.measure_weyl(&xz).unwrap();
            assert!(again.deterministic);
            assert_eq!(again.value, first.value);
        }
    }

    #[test]
    fn forced_outcomes() {
        let mut t = StabilizerTableau::new_computational(3, 1).unwrap();
        let x = WeylOp::x_on(3, 1, 0).unwrap();
        let o = t.measure_weyl_forced(&x, 2).unwrap();
        assert_eq!(o.value, 2);
        assert_eq!(t.expectation_weyl(&x).unwrap(), Expectation::Root(2));
        assert!(t.measure_weyl_forced(&x, 1).is_err());
    }

    #[test]
    fn projector_values() {
        let mut t = StabilizerTableau::new_computational(3, 1).unwrap();
        let z = WeylOp::z_on(3, 1, 0).unwrap();
        assert_eq!(t.projector_family(&z).unwrap(), vec![1.0, 0.0, 0.0]);
        t.apply_gate(&CliffordGate::one(GateKind::ShiftX, 0)).unwrap();
        // |1⟩: ⟨Z⟩ = ω
        assert_eq!(t.projector_family(&z).unwrap(), vec![0.0, 1.0, 0.0]);
        let x = WeylOp::x_on(3, 1, 0).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(t.projector_family(&x).unwrap(), vec![third, third, third]);
        assert!(t.projector_expectation(&x, 3).is_err());
    }
}
