use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::decompose::decode_pair;
use super::native::{NativeGate, QubitState};
use crate::circuit::CIRCUIT_SCHEMA;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum QubitInstruction {
    Gate(NativeGate),
    /// Writes `table[v]` to a qutrit register, where v is the level read on the
    /// two clbits (q1, q2). The leak pattern heralds the shot.
    Decode { clbits: [usize; 2], creg: usize, table: [u8; 3] },
    /// `branches[s]` runs when qutrit register `creg` holds s.
    Cond { creg: usize, branches: Vec<Vec<NativeGate>> },
    Barrier,
}

/// Circuit over the native qubit gate set, with qutrit registers fed by decoded pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCircuit {
    pub schema: String,
    pub flavor: String,
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub n_cregs: usize,
    pub instructions: Vec<QubitInstruction>,
}

/// Outcome of one dense shot of a qubit circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitShot {
    pub clbits: Vec<u8>,
    pub creg_values: Vec<u8>,
    pub herald_discard: bool,
}

impl QubitCircuit {
    pub fn new(n_qubits: usize) -> Self {
        QubitCircuit {
            schema: CIRCUIT_SCHEMA.into(),
            flavor: "qubit".into(),
            n_qubits,
            n_clbits: 0,
            n_cregs: 0,
            instructions: Vec::new(),
        }
    }

    /// Every native gate, including all conditional branches.
    pub fn gates(&self) -> Vec<&NativeGate> {
        let mut out = Vec::new();
        for ins in &self.instructions {
            match ins {
                QubitInstruction::Gate(g) => out.push(g),
                QubitInstruction::Cond { branches, .. } => out.extend(branches.iter().flatten()),
                _ => {}
            }
        }
        out
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().into_iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn validate(&self) -> Result<()> {
        let gate_ok = |g: &NativeGate| -> Result<()> {
            g.validate(self.n_qubits)?;
            if let NativeGate::MeasureZ { clbit, .. } = *g {
                if clbit >= self.n_clbits {
                    return Err(Error::CregOutOfRange { index: clbit, n: self.n_clbits });
                }
            }
            Ok(())
        };
        for ins in &self.instructions {
            match ins {
                QubitInstruction::Gate(g) => gate_ok(g)?,
                QubitInstruction::Decode { clbits, creg, .. } => {
                    if clbits.iter().any(|&c| c >= self.n_clbits) || *creg >= self.n_cregs {
                        return Err(Error::CregOutOfRange { index: *creg, n: self.n_cregs });
                    }
                }
                QubitInstruction::Cond { creg, branches } => {
                    if *creg >= self.n_cregs || branches.len() > 3 {
                        return Err(Error::MalformedCondition(format!("register {creg}")));
                    }
                    for g in branches.iter().flatten() {
                        if !g.is_unitary() {
                            return Err(Error::MalformedCondition("measurement inside a branch".into()));
                        }
                        gate_ok(g)?;
                    }
                }
                QubitInstruction::Barrier => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: QubitCircuit = serde_json::from_str(s)?;
        if c.schema != CIRCUIT_SCHEMA || c.flavor != "qubit" {
            return Err(Error::Serde(format!("expected {CIRCUIT_SCHEMA} qubit flavor, got {} {}", c.schema, c.flavor)));
        }
        c.validate()?;
        Ok(c)
    }

    /// Plain-text dump, one statement per line:
    ///
    /// ```text
    /// qubits N; clbits M; cregs K;
    /// u1q(θ,φ) q[i];   rz(θ) q[i];   zzphase(θ) q[i],q[j];
    /// measure q[i] -> c[k];
    /// decode c[a],c[b] -> r[k] table(t0,t1,t2);
    /// if (r[k]==s) { <gates> }
    /// barrier;
    /// ```
    /// Angles are in turns.
    pub fn to_qasm(&self) -> String {
        fn gate(g: &NativeGate) -> String {
            match *g {
                NativeGate::U1q { q, theta, phi } => format!("u1q({theta},{phi}) q[{q}];"),
                NativeGate::Rz { q, theta } => format!("rz({theta}) q[{q}];"),
                NativeGate::ZzPhase { a, b, theta } => format!("zzphase({theta}) q[{a}],q[{b}];"),
                NativeGate::MeasureZ { q, clbit } => format!("measure q[{q}] -> c[{clbit}];"),
            }
        }
        let mut out = format!("qubits {}; clbits {}; cregs {};\n", self.n_qubits, self.n_clbits, self.n_cregs);
        for ins in &self.instructions {
            let _ = match ins {
                QubitInstruction::Gate(g) => writeln!(out, "{}", gate(g)),
                QubitInstruction::Decode { clbits, creg, table } => writeln!(
                    out,
                    "decode c[{}],c[{}] -> r[{creg}] table({},{},{});",
                    clbits[0], clbits[1], table[0], table[1], table[2]
                ),
                QubitInstruction::Cond { creg, branches } => {
                    for (s, b) in branches.iter().enumerate().filter(|(_, b)| !b.is_empty()) {
                        let body: Vec<String> = b.iter().map(gate).collect();
                        let _ = writeln!(out, "if (r[{creg}]=={s}) {{ {} }}", body.join(" "));
                    }
                    Ok(())
                }
                QubitInstruction::Barrier => writeln!(out, "barrier;"),
            };
        }
        out
    }

    /// Runs one shot on a dense state vector from |0…0⟩.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(QubitShot, QubitState)> {
        let mut psi = QubitState::zero(self.n_qubits)?;
        let mut shot = QubitShot { clbits: vec![0; self.n_clbits], creg_values: vec![0; self.n_cregs], herald_discard: false };
        let mut apply = |psi: &mut QubitState, shot: &mut QubitShot, g: &NativeGate| -> Result<()> {
            match *g {
                NativeGate::MeasureZ { q, clbit } => shot.clbits[clbit] = psi.measure(q, rng)?,
                _ => psi.apply(g)?,
            }
            Ok(())
        };
        for ins in &self.instructions {
            match ins {
                QubitInstruction::Gate(g) => apply(&mut psi, &mut shot, g)?,
                QubitInstruction::Decode { clbits, creg, table } => {
                    match decode_pair([shot.clbits[clbits[0]], shot.clbits[clbits[1]]]) {
                        Some(v) => shot.creg_values[*creg] = table[v as usize],
                        None => shot.herald_discard = true,
                    }
                }
                QubitInstruction::Cond { creg, branches } => {
                    if let Some(b) = branches.get(shot.creg_values[*creg] as usize) {
                        for g in b {
                            apply(&mut psi, &mut shot, g)?;
                        }
                    }
                }
                QubitInstruction::Barrier => {}
            }
        }
        Ok((shot, psi))
    }
}
