use rand::Rng;
use serde::{Deserialize, Serialize};

use super::compile::{compile, zz_placements, CompileOptions};
use super::decompose::{decode_pair, encode_level};
use super::native::NativeGate;
use super::qcircuit::{QubitCircuit, QubitInstruction};
use crate::circuit::{Circuit, NoiseChannel};
use crate::error::{Error, Result};

/// Removes shots in which any qutrit reads the leak pattern 01.
/// Returns the decoded levels of retained shots and the discarded fraction.
pub fn herald_filter(records: &[Vec<[u8; 2]>], width: usize) -> Result<(Vec<Vec<u8>>, f64)> {
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        if r.len() != width {
            return Err(Error::InvalidArgument(format!("record has {} qutrits, expected {width}", r.len())));
        }
        if r.iter().flatten().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bit value above 1".into()));
        }
        if let Some(levels) = r.iter().map(|&p| decode_pair(p)).collect::<Option<Vec<u8>>>() {
            kept.push(levels);
        }
    }
    let frac = if records.is_empty() { 0.0 } else { 1.0 - kept.len() as f64 / records.len() as f64 };
    Ok((kept, frac))
}

/// Qubit pairs of ideal qutrit outcomes.
pub fn encode_record(levels: &[u8]) -> Vec<[u8; 2]> {
    levels.iter().map(|&v| encode_level(v)).collect()
}

/// Native gates acting on each qubit (conditional branches included).
pub fn gates_per_qubit(c: &QubitCircuit) -> Vec<usize> {
    let mut n = vec![0; c.n_qubits];
    for g in c.gates() {
        if g.is_unitary() {
            for q in g.qubits() {
                n[q] += 1;
            }
        }
    }
    n
}

/// Flips each read bit of qubit q with the odd-flip probability of `gates[q]`
/// independent flips of probability p.
pub fn inject_bitflips<R: Rng + ?Sized>(levels: &[Vec<u8>], gates: &[usize], p: f64, rng: &mut R) -> Vec<Vec<[u8; 2]>> {
    let flip: Vec<f64> = gates.iter().map(|&g| (1.0 - (1.0 - 2.0 * p).powi(g as i32)) / 2.0).collect();
    levels
        .iter()
        .map(|shot| {
            shot.iter()
                .enumerate()
                .map(|(k, &v)| {
                    let mut bits = encode_level(v);
                    for (j, b) in bits.iter_mut().enumerate() {
                        if rng.gen::<f64>() < flip[2 * k + j] {
                            *b ^= 1;
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect()
}

/// First-order discard fraction for [`inject_bitflips`]: a single flip of q2 on
/// level 0 or of q1 on level 2 produces the leak pattern.
pub fn linear_discard_estimate(levels: &[Vec<u8>], gates: &[usize], p: f64) -> f64 {
    if levels.is_empty() {
        return 0.0;
    }
    let total: f64 = levels
        .iter()
        .map(|shot| {
            shot.iter()
                .enumerate()
                .map(|(k, &v)| match v {
                    0 => gates[2 * k + 1] as f64 * p,
                    2 => gates[2 * k] as f64 * p,
                    _ => 0.0,
                })
                .sum::<f64>()
        })
        .sum();
    total / levels.len() as f64
}

/// Independent readout flips: P(read 0 | 1) = p01, P(read 1 | 0) = p10.
pub fn readout_flips<R: Rng + ?Sized>(bits: &mut [[u8; 2]], p01: f64, p10: f64, rng: &mut R) {
    for b in bits.iter_mut().flatten() {
        let p = if *b == 1 { p01 } else { p10 };
        if rng.gen::<f64>() < p {
            *b ^= 1;
        }
    }
}

/// Leak fraction of a uniformly random non-identity two-qubit Pauli error on the
/// encoded maximally mixed qutrit (both qubits of one qutrit).
pub const LEAK_SAME_QUTRIT: f64 = 4.0 / 15.0;
/// Same, with the two qubits in different qutrits (probability that either qutrit leaks).
pub const LEAK_CROSS_QUTRIT: f64 = 44.0 / 135.0;

/// Gate-level noise of the encoded hardware, lifted to the qutrit simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareNoise {
    /// Two-qubit depolarizing probability per ZZPhase gate.
    pub p2: f64,
    /// Single-qubit depolarizing probability per U1q gate.
    #[serde(default)]
    pub p1: f64,
}

impl Default for HardwareNoise {
    fn default() -> Self {
        HardwareNoise { p2: 2e-3, p1: 0.0 }
    }
}

/// Inserts, after every qutrit instruction, the noise of the native gates it compiles to.
///
/// Each ZZPhase becomes heralded leakage with the fraction of qubit errors that
/// leave the encoded space, and qutrit depolarizing noise with the rest.
/// Each U1q adds single-qutrit depolarizing noise with probability p1.
/// Gates inside conditional branches are not charged.
pub fn with_hardware_noise(c: &Circuit, noise: &HardwareNoise) -> Result<Circuit> {
    for p in [noise.p1, noise.p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidNoise(format!("probability {p} outside [0,1]")));
        }
    }
    let compiled = compile(c, &CompileOptions::default())?;
    let mut per: Vec<Vec<(NoiseChannel, Vec<usize>)>> = vec![Vec::new(); c.len() + 1];
    for (o, a, b) in zz_placements(&compiled) {
        if noise.p2 == 0.0 {
            break;
        }
        if a == b {
            per[o].push((NoiseChannel::leakage(noise.p2 * LEAK_SAME_QUTRIT), vec![a]));
            per[o].push((NoiseChannel::depolarizing1(noise.p2 * (1.0 - LEAK_SAME_QUTRIT)), vec![a]));
        } else {
            per[o].push((NoiseChannel::leakage(noise.p2 * LEAK_CROSS_QUTRIT), vec![a, b]));
            per[o].push((NoiseChannel::depolarizing2(noise.p2 * (1.0 - LEAK_CROSS_QUTRIT)), vec![a, b]));
        }
    }
    if noise.p1 > 0.0 {
        for (ins, &o) in compiled.circuit.instructions.iter().zip(&compiled.origins) {
            if let QubitInstruction::Gate(NativeGate::U1q { q, .. }) = ins {
                per[o].push((NoiseChannel::depolarizing1(noise.p1), vec![q / 2]));
            }
        }
    }
    let mut out = Circuit::new(c.d(), c.n_qudits())?;
    for _ in 0..c.n_cregs() {
        out.add_creg();
    }
    for (i, ins) in c.instructions().iter().enumerate() {
        out.push(ins.clone())?;
        for (ch, sites) in per[i].drain(..) {
            out.noise(ch, sites)?;
        }
    }
    Ok(out)
}
