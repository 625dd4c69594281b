//! Versioned JSON form of circuits.

use serde::{Deserialize, Serialize};

use super::{Circuit, Instruction, NoiseChannel};
use crate::error::{Error, Result};
use crate::weyl::{CliffordGate, WeylOp};

pub const CIRCUIT_SCHEMA: &str = "z3tc.circuit/1";

/// Sparse Weyl operator: `ω^phase ∏ X^x Z^z` over the listed `[site, x, z]` factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseWeyl {
    #[serde(default)]
    pub phase: u8,
    pub factors: Vec<(usize, u8, u8)>,
}

impl SparseWeyl {
    pub fn from_op(w: &WeylOp) -> Self {
        SparseWeyl {
            phase: w.phase(),
            factors: w.support().into_iter().map(|s| (s, w.site(s).0, w.site(s).1)).collect(),
        }
    }

    pub fn to_op(&self, d: u32, n: usize) -> Result<WeylOp> {
        let mut w = WeylOp::identity(d, n)?;
        for &(s, a, b) in &self.factors {
            if s >= n {
                return Err(Error::TargetOutOfRange { index: s, n });
            }
            w.set_site(s, a, b);
        }
        Ok(w.with_phase(self.phase as i64))
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    schema: String,
    flavor: String,
    d: u32,
    n_qudits: usize,
    n_cregs: usize,
    instructions: Vec<InsDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum InsDoc {
    Gate(CliffordGate),
    Measure { observable: SparseWeyl, creg: usize },
    Cond { creg: usize, branches: Vec<Vec<CliffordGate>> },
    Noise { channel: NoiseChannel, sites: Vec<usize> },
    Barrier,
}

impl Circuit {
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = CircuitDoc {
            schema: CIRCUIT_SCHEMA.into(),
            flavor: "qutrit".into(),
            d: self.d,
            n_qudits: self.n_qudits,
            n_cregs: self.n_cregs,
            instructions: self
                .instructions
                .iter()
                .map(|ins| match ins {
                    Instruction::Gate(g) => InsDoc::Gate(g.clone()),
                    Instruction::Measure { observable, creg } => {
                        InsDoc::Measure { observable: SparseWeyl::from_op(observable), creg: *creg }
                    }
                    Instruction::CondGate { creg, branches } => {
                        InsDoc::Cond { creg: *creg, branches: branches.clone() }
                    }
                    Instruction::Noise { channel, sites } => {
                        InsDoc::Noise { channel: channel.clone(), sites: sites.clone() }
                    }
                    Instruction::Barrier => InsDoc::Barrier,
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("circuit serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(s)?;
        if doc.schema != CIRCUIT_SCHEMA {
            return Err(Error::Serde(format!("unsupported schema {}", doc.schema)));
        }
        if doc.flavor != "qutrit" {
            return Err(Error::Serde(format!("expected qutrit flavor, got {}", doc.flavor)));
        }
        let mut c = Circuit::new(doc.d, doc.n_qudits)?;
        c.n_cregs = doc.n_cregs;
        for ins in doc.instructions {
            c.instructions.push(match ins {
                InsDoc::Gate(g) => Instruction::Gate(g),
                InsDoc::Measure { observable, creg } => Instruction::Measure {
                    observable: observable.to_op(doc.d, doc.n_qudits)?,
                    creg,
                },
                InsDoc::Cond { creg, branches } => Instruction::CondGate { creg, branches },
                InsDoc::Noise { channel, sites } => Instruction::Noise { channel, sites },
                InsDoc::Barrier => Instruction::Barrier,
            });
        }
        c.validate()?;
        Ok(c)
    }
}
