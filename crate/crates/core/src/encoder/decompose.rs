use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::native::{sequence_unitary, NativeGate};
use crate::dense::{gate_matrix, omega, CMatrix};
use crate::error::{Error, Result};
use crate::weyl::GateKind;

/// Basis index (q1 + 2·q2) of each encoded qutrit level: 0→|00⟩, 1→|10⟩, 2→|11⟩.
pub const ENCODED: [usize; 3] = [0, 1, 3];
/// Basis index of the leak state |01⟩.
pub const LEAK: usize = 2;

/// Qubit pair (q1, q2) written for a qutrit level.
pub fn encode_level(v: u8) -> [u8; 2] {
    match v % 3 {
        0 => [0, 0],
        1 => [1, 0],
        _ => [1, 1],
    }
}

/// Qutrit level of a qubit pair, or None for the leak pattern 01.
pub fn decode_pair(bits: [u8; 2]) -> Option<u8> {
    match bits {
        [0, 0] => Some(0),
        [1, 0] => Some(1),
        [1, 1] => Some(2),
        _ => None,
    }
}

/// Qutrit operations the encoder can lower to native gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QutritGate {
    Z,
    Zdag,
    X,
    Xdag,
    C,
    H,
    Hdag,
    CX,
    CXdag,
    CZ,
    CZdag,
    /// H applied to a qutrit known to be in |0⟩.
    Mprep,
    /// diag(ω^k0, ω^k1, ω^k2)
    Phase([u8; 3]),
}

impl QutritGate {
    /// The fixed named gate set (Phase excluded).
    pub const NAMED: [QutritGate; 12] = [
        QutritGate::Z,
        QutritGate::Zdag,
        QutritGate::X,
        QutritGate::Xdag,
        QutritGate::C,
        QutritGate::H,
        QutritGate::Hdag,
        QutritGate::CX,
        QutritGate::CXdag,
        QutritGate::CZ,
        QutritGate::CZdag,
        QutritGate::Mprep,
    ];

    pub fn arity(self) -> usize {
        match self {
            QutritGate::CX | QutritGate::CXdag | QutritGate::CZ | QutritGate::CZdag => 2,
            _ => 1,
        }
    }

    pub fn from_kind(kind: GateKind) -> QutritGate {
        match kind {
            GateKind::ShiftX => QutritGate::X,
            GateKind::ShiftXdag => QutritGate::Xdag,
            GateKind::ClockZ => QutritGate::Z,
            GateKind::ClockZdag => QutritGate::Zdag,
            GateKind::Conj => QutritGate::C,
            GateKind::Fourier => QutritGate::H,
            GateKind::FourierDag => QutritGate::Hdag,
            GateKind::CX => QutritGate::CX,
            GateKind::CXdag => QutritGate::CXdag,
            GateKind::CZ => QutritGate::CZ,
            GateKind::CZdag => QutritGate::CZdag,
        }
    }

    pub fn inverse(self) -> QutritGate {
        use QutritGate::*;
        match self {
            Z => Zdag,
            Zdag => Z,
            X => Xdag,
            Xdag => X,
            C => C,
            H | Mprep => Hdag,
            Hdag => H,
            CX => CXdag,
            CXdag => CX,
            CZ => CZdag,
            CZdag => CZ,
            Phase(k) => Phase(k.map(|v| (3 - v % 3) % 3)),
        }
    }

    /// Diagonal exponents when the gate is diagonal in the clock basis.
    pub fn diagonal(self) -> Option<[u8; 3]> {
        match self {
            QutritGate::Z => Some([0, 1, 2]),
            QutritGate::Zdag => Some([0, 2, 1]),
            QutritGate::Phase(k) => Some(k.map(|v| v % 3)),
            _ => None,
        }
    }

    /// Canonical gate for a diagonal; None for the identity.
    pub fn from_diagonal(k: [u8; 3]) -> Option<QutritGate> {
        // a global phase is irrelevant, so normalise k0 to 0
        let k = k.map(|v| (v % 3 + 3 - k[0] % 3) % 3);
        match k {
            [0, 0, 0] => None,
            [0, 1, 2] => Some(QutritGate::Z),
            [0, 2, 1] => Some(QutritGate::Zdag),
            _ => Some(QutritGate::Phase(k)),
        }
    }

    pub fn name(self) -> String {
        match self {
            QutritGate::Phase(k) => format!("Phase{}{}{}", k[0], k[1], k[2]),
            g => format!("{g:?}"),
        }
    }

    /// Qutrit matrix: 3×3, or 9×9 with index control + 3·target.
    pub fn target_matrix(self) -> CMatrix {
        use QutritGate::*;
        let kind = match self {
            Z => GateKind::ClockZ,
            Zdag => GateKind::ClockZdag,
            X => GateKind::ShiftX,
            Xdag => GateKind::ShiftXdag,
            C => GateKind::Conj,
            H | Mprep => GateKind::Fourier,
            Hdag => GateKind::FourierDag,
            CX => GateKind::CX,
            CXdag => GateKind::CXdag,
            CZ => GateKind::CZ,
            CZdag => GateKind::CZdag,
            Phase(k) => {
                let mut m = CMatrix::zeros(3);
                for (i, &v) in k.iter().enumerate() {
                    m.set(i, i, omega(3, v as i64));
                }
                return m;
            }
        };
        gate_matrix(kind, 3)
    }
}

impl fmt::Display for QutritGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// 27 angles of the H circuit: four layers of (θ, φ, rz) on q1 then q2, with a
/// ZZPhase angle after each of the first three layers.
const H_PARAMS: [f64; 27] = [
    -0.6245718587096677,
    -1.1067778598904399,
    1.1007708174466668,
    -0.3809555105838887,
    -1.1080384649998334,
    0.7046939777099803,
    0.5,
    0.3186663646994586,
    0.37271810297889957,
    0.8947921316999108,
    -0.5685034716746271,
    0.38814878077455844,
    -0.07490377958365715,
    0.5,
    -0.743124932807663,
    0.49422547844911163,
    0.8233316628010995,
    0.525201578396399,
    -0.8453993609433761,
    0.9309094251616581,
    0.5,
    0.22487390012383685,
    -0.3514233857440605,
    0.08257962014231374,
    -0.3552902765772843,
    0.7452223226788713,
    0.40139502558237755,
];

/// First rotation angle of the state-preparation circuit: 2·arccos(1/√3)/π.
const MPREP_THETA: f64 = 0.6081734479693927;

fn u1q(q: usize, theta: f64, phi: f64) -> NativeGate {
    NativeGate::U1q { q, theta, phi }
}

fn rz(q: usize, theta: f64) -> NativeGate {
    NativeGate::Rz { q, theta }
}

fn zz(a: usize, b: usize, theta: f64) -> NativeGate {
    NativeGate::ZzPhase { a, b, theta }
}

fn qubit_h(q: usize) -> [NativeGate; 2] {
    [rz(q, 1.0), u1q(q, 0.5, 0.5)]
}

fn cnot(c: usize, t: usize) -> Vec<NativeGate> {
    let mut v = qubit_h(t).to_vec();
    v.extend([rz(c, 0.5), rz(t, 0.5), zz(c, t, -0.5)]);
    v.extend(qubit_h(t));
    v
}

fn invert(seq: &[NativeGate]) -> Vec<NativeGate> {
    seq.iter().rev().map(|g| g.inverse()).collect()
}

fn h_local() -> Vec<NativeGate> {
    let p = &H_PARAMS;
    let mut v = Vec::new();
    let mut i = 0;
    for layer in 0..4 {
        for q in 0..2 {
            v.push(rz(q, p[i + 2]));
            v.push(u1q(q, p[i], p[i + 1]));
            i += 3;
        }
        if layer < 3 {
            v.push(zz(0, 1, p[i]));
            i += 1;
        }
    }
    v
}

/// RZ angles reproducing a qutrit diagonal. The leak level gets the phase that
/// cancels the ZZ term, so no entangling gate is needed.
fn diagonal_local(k: [u8; 3]) -> Vec<NativeGate> {
    let p = k.map(|v| 2.0 * std::f64::consts::PI * v as f64 / 3.0);
    // phases at basis indices 0..3 (|00⟩, |10⟩, |01⟩, |11⟩)
    let ph = [p[0], p[1], p[0] - p[1] + p[2], p[2]];
    let b = (ph[0] - ph[1] + ph[2] - ph[3]) / 4.0;
    let c = (ph[0] + ph[1] - ph[2] - ph[3]) / 4.0;
    let pi = std::f64::consts::PI;
    [(0, -2.0 * b / pi), (1, -2.0 * c / pi)]
        .into_iter()
        .filter(|(_, t)| t.abs() > 1e-15)
        .map(|(q, t)| rz(q, t))
        .collect()
}

/// CZ^s on qubits (c1, c2, t1, t2) = (0, 1, 2, 3): four ZZPhase gates plus local RZs.
fn cz_local(s: f64) -> Vec<NativeGate> {
    let mut v: Vec<NativeGate> = (0..4).map(|q| rz(q, s * 2.0 / 3.0)).collect();
    for a in 0..2 {
        for b in 2..4 {
            v.push(zz(a, b, -s / 3.0));
        }
    }
    v
}

fn local(g: QutritGate) -> Vec<NativeGate> {
    use QutritGate::*;
    match g {
        Z | Zdag | Phase(_) => diagonal_local(g.diagonal().expect("diagonal gate")),
        X => {
            let mut v = cnot(0, 1);
            v.extend(cnot(1, 0));
            v.push(u1q(0, 1.0, 0.0));
            v
        }
        Xdag => invert(&local(X)),
        C => vec![
            u1q(1, 0.5, 0.0),
            rz(0, -1.0),
            rz(1, -1.0),
            zz(0, 1, -0.5),
            u1q(1, 0.5, -0.5),
            rz(1, 0.5),
        ],
        H => h_local(),
        Hdag => invert(&h_local()),
        Mprep => {
            let mut v = vec![u1q(0, MPREP_THETA, 0.5), u1q(1, 0.25, 0.5)];
            v.extend(cnot(0, 1));
            v.push(u1q(1, -0.25, 0.5));
            v
        }
        CZ => cz_local(1.0),
        CZdag => cz_local(-1.0),
        CX | CXdag => {
            let on_target = |seq: Vec<NativeGate>| -> Vec<NativeGate> { seq.iter().map(|x| x.remap(&[2, 3])).collect() };
            let mut v = on_target(h_local());
            v.extend(cz_local(if g == CX { 1.0 } else { -1.0 }));
            v.extend(on_target(invert(&h_local())));
            v
        }
    }
}

/// Native sequence for `g` on encoded qubits: [q1, q2] per qutrit, control first.
pub fn decompose_gate(g: QutritGate, qubits: &[usize]) -> Result<Vec<NativeGate>> {
    if qubits.len() != 2 * g.arity() {
        return Err(Error::ArityMismatch { left: 2 * g.arity(), right: qubits.len() });
    }
    let mut seen = qubits.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != qubits.len() {
        return Err(Error::InvalidTargets(format!("repeated qubit in {qubits:?}")));
    }
    Ok(local(g).iter().map(|x| x.remap(qubits)).collect())
}

/// ZZPhase count of the decomposition of `g`.
pub fn zz_budget(g: QutritGate) -> usize {
    local(g).iter().filter(|x| x.is_two_qubit()).count()
}

/// Local qubit index of an encoded multi-qutrit basis state (first qutrit least significant).
pub fn encoded_index(levels: &[usize]) -> usize {
    levels.iter().enumerate().map(|(k, &v)| ENCODED[v] << (2 * k)).sum()
}

/// Restriction of a 2k-qubit unitary to the encoded 3^k-dimensional subspace.
pub fn restrict_to_encoded(u: &CMatrix, k: usize) -> CMatrix {
    let dim = 3usize.pow(k as u32);
    let idx: Vec<usize> = (0..dim)
        .map(|i| {
            let levels: Vec<usize> = (0..k).map(|j| (i / 3usize.pow(j as u32)) % 3).collect();
            encoded_index(&levels)
        })
        .collect();
    let mut m = CMatrix::zeros(dim);
    for (r, &ir) in idx.iter().enumerate() {
        for (c, &ic) in idx.iter().enumerate() {
            m.set(r, c, u.get(ir, ic));
        }
    }
    m
}

/// Max entrywise deviation of `seq` from the target of `g` on the encoded subspace,
/// after global-phase alignment. Mprep is compared on the |0⟩ column only.
pub fn sequence_deviation(g: QutritGate, seq: &[NativeGate]) -> Result<f64> {
    let k = g.arity();
    let u = sequence_unitary(seq, 2 * k)?;
    let built = restrict_to_encoded(&u, k);
    let target = g.target_matrix();
    if g != QutritGate::Mprep {
        return Ok(built.max_diff_up_to_phase(&target));
    }
    let col = |m: &CMatrix| (0..3).map(|r| m.get(r, 0)).collect::<Vec<Complex64>>();
    let (b, t) = (col(&built), col(&target));
    let ph = b[0] / t[0];
    let ph = if ph.norm() > 1e-12 { ph / ph.norm() } else { Complex64::new(1.0, 0.0) };
    let leak = u.get(LEAK, 0).norm();
    Ok(b.iter().zip(&t).map(|(x, y)| (x - ph * y).norm()).fold(leak, f64::max))
}

/// Deviation of the built-in decomposition of `g`.
pub fn verify_decomposition(g: QutritGate) -> f64 {
    sequence_deviation(g, &local(g)).expect("built-in decompositions act on at most four qubits")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_codes_round_trip() {
        for v in 0..3 {
            assert_eq!(decode_pair(encode_level(v)), Some(v));
            let [a, b] = encode_level(v);
            assert_eq!(ENCODED[v as usize], a as usize + 2 * b as usize);
        }
        assert_eq!(decode_pair([0, 1]), None);
    }

    #[test]
    fn diagonal_normalisation() {
        assert_eq!(QutritGate::from_diagonal([1, 2, 0]), Some(QutritGate::Z));
        assert_eq!(QutritGate::from_diagonal([2, 2, 2]), None);
        assert_eq!(QutritGate::Phase([0, 1, 1]).inverse(), QutritGate::Phase([0, 2, 2]));
    }

    #[test]
    fn mprep_angle_matches_closed_form() {
        let t = 2.0 * (1.0f64 / 3.0f64.sqrt()).acos() / std::f64::consts::PI;
        assert!((t - MPREP_THETA).abs() < 1e-15);
    }
}
