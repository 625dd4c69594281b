use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::CMatrix;
use crate::error::{Error, Result};

/// Native trapped-ion style gate. Angles are in turns: a rotation by θ means
/// exp(−iπθ·G/2) for the generator G.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeGate {
    /// exp(−iπθ/2 (cos πφ X + sin πφ Y))
    U1q { q: usize, theta: f64, phi: f64 },
    /// exp(−iπθ Z/2)
    Rz { q: usize, theta: f64 },
    /// exp(−iπθ Z⊗Z/2)
    ZzPhase { a: usize, b: usize, theta: f64 },
    /// Computational-basis readout into a classical bit.
    MeasureZ { q: usize, clbit: usize },
}

impl NativeGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            NativeGate::U1q { q, .. } | NativeGate::Rz { q, .. } | NativeGate::MeasureZ { q, .. } => vec![q],
            NativeGate::ZzPhase { a, b, .. } => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, NativeGate::ZzPhase { .. })
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, NativeGate::MeasureZ { .. })
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n_qubits {
                return Err(Error::TargetOutOfRange { index: q, n: n_qubits });
            }
        }
        let finite = match *self {
            NativeGate::U1q { theta, phi, .. } => theta.is_finite() && phi.is_finite(),
            NativeGate::Rz { theta, .. } | NativeGate::ZzPhase { theta, .. } => theta.is_finite(),
            NativeGate::MeasureZ { .. } => true,
        };
        if !finite {
            return Err(Error::InvalidArgument(format!("non-finite angle in {self:?}")));
        }
        if let NativeGate::ZzPhase { a, b, .. } = *self {
            if a == b {
                return Err(Error::InvalidTargets(format!("ZZPhase on repeated qubit {a}")));
            }
        }
        Ok(())
    }

    /// Inverse of a unitary gate.
    pub fn inverse(&self) -> NativeGate {
        match *self {
            NativeGate::U1q { q, theta, phi } => NativeGate::U1q { q, theta: -theta, phi },
            NativeGate::Rz { q, theta } => NativeGate::Rz { q, theta: -theta },
            NativeGate::ZzPhase { a, b, theta } => NativeGate::ZzPhase { a, b, theta: -theta },
            m @ NativeGate::MeasureZ { .. } => m,
        }
    }

    /// Relabels qubits through `map`.
    pub fn remap(&self, map: &[usize]) -> NativeGate {
        match *self {
            NativeGate::U1q { q, theta, phi } => NativeGate::U1q { q: map[q], theta, phi },
            NativeGate::Rz { q, theta } => NativeGate::Rz { q: map[q], theta },
            NativeGate::ZzPhase { a, b, theta } => NativeGate::ZzPhase { a: map[a], b: map[b], theta },
            NativeGate::MeasureZ { q, clbit } => NativeGate::MeasureZ { q: map[q], clbit },
        }
    }

    /// Local matrix (2×2, or 4×4 with index a + 2b). Measurements have none.
    pub fn matrix(&self) -> Option<CMatrix> {
        let e = |x: f64| Complex64::from_polar(1.0, x);
        match *self {
            NativeGate::U1q { theta, phi, .. } => {
                let (c, s) = ((PI * theta / 2.0).cos(), (PI * theta / 2.0).sin());
                let mi = Complex64::new(0.0, -s);
                Some(CMatrix::from_rows(&[
                    vec![Complex64::new(c, 0.0), mi * e(-PI * phi)],
                    vec![mi * e(PI * phi), Complex64::new(c, 0.0)],
                ]))
            }
            NativeGate::Rz { theta, .. } => {
                let mut m = CMatrix::zeros(2);
                m.set(0, 0, e(-PI * theta / 2.0));
                m.set(1, 1, e(PI * theta / 2.0));
                Some(m)
            }
            NativeGate::ZzPhase { theta, .. } => {
                let mut m = CMatrix::zeros(4);
                for (i, z) in [1.0, -1.0, -1.0, 1.0].into_iter().enumerate() {
                    m.set(i, i, e(-PI * theta * z / 2.0));
                }
                Some(m)
            }
            NativeGate::MeasureZ { .. } => None,
        }
    }
}

/// Qubit state vector; qubit q is bit q of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState {
    n: usize,
    amps: Vec<Complex64>,
}

/// Largest register the dense qubit simulator accepts.
pub const MAX_DENSE_QUBITS: usize = 20;

impl QubitState {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::SizeOverflow(1usize << n.min(63)));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        if index >= amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QubitState { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > MAX_DENSE_QUBITS || amps.len() != 1 << n {
            return Err(Error::InvalidArgument("amplitude vector does not match qubit count".into()));
        }
        Ok(QubitState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn apply(&mut self, g: &NativeGate) -> Result<()> {
        g.validate(self.n)?;
        let m = g.matrix().ok_or_else(|| Error::Unsupported("measurement in unitary evolution".into()))?;
        match *g {
            NativeGate::ZzPhase { a, b, .. } => {
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    let l = ((i >> a) & 1) | (((i >> b) & 1) << 1);
                    *amp *= m.get(l, l);
                }
            }
            NativeGate::U1q { q, .. } | NativeGate::Rz { q, .. } => {
                let bit = 1 << q;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = m.get(0, 0) * a0 + m.get(0, 1) * a1;
                        self.amps[i | bit] = m.get(1, 0) * a0 + m.get(1, 1) * a1;
                    }
                }
            }
            NativeGate::MeasureZ { .. } => unreachable!(),
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[NativeGate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    /// Probability of reading 1 on qubit q.
    pub fn prob_one(&self, q: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| (i >> q) & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projective Z measurement of qubit q.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8> {
        if q >= self.n {
            return Err(Error::TargetOutOfRange { index: q, n: self.n });
        }
        let p1 = self.prob_one(q);
        let bit = u8::from(rng.gen::<f64>() < p1);
        let norm = if bit == 1 { p1 } else { 1.0 - p1 }.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a = if ((i >> q) & 1) as u8 == bit { *a / norm } else { Complex64::new(0.0, 0.0) };
        }
        Ok(bit)
    }
}

/// Unitary of a gate sequence on `n` qubits (column c = image of basis state c).
pub fn sequence_unitary(gates: &[NativeGate], n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim);
    for c in 0..dim {
        let mut s = QubitState::basis(n, c)?;
        s.apply_all(gates)?;
        for (r, a) in s.amps.iter().enumerate() {
            m.set(r, c, *a);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u1q_full_turn_is_minus_identity() {
        let m = NativeGate::U1q { q: 0, theta: 2.0, phi: 0.3 }.matrix().unwrap();
        assert!(m.max_abs_diff(&CMatrix::identity(2).scale(Complex64::new(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn inverse_undoes_gate() {
        let gs = [
            NativeGate::U1q { q: 0, theta: 0.3, phi: 0.7 },
            NativeGate::Rz { q: 1, theta: -0.4 },
            NativeGate::ZzPhase { a: 0, b: 1, theta: 0.25 },
        ];
        let mut all: Vec<NativeGate> = gs.to_vec();
        all.extend(gs.iter().rev().map(|g| g.inverse()));
        assert!(sequence_unitary(&all, 2).unwrap().max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn rejects_degenerate_zz() {
        assert!(NativeGate::ZzPhase { a: 1, b: 1, theta: 0.5 }.validate(2).is_err());
        assert!(NativeGate::Rz { q: 0, theta: f64::NAN }.validate(1).is_err());
    }
}
