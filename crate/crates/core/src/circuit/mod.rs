//! Qudit circuits with classical registers, feed-forward and stochastic Weyl noise.

mod json;
mod noise;
mod shots;

pub use json::{CIRCUIT_SCHEMA, SparseWeyl};
pub use noise::{NoiseChannel, NoiseEvent, NoiseKind, WeightedWeyl};
pub use shots::{execute, run_shot, run_shot_with, run_shots, shot_seed, ShotBatch, ShotHook, ShotRecord};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl::{check_dim, CliffordGate, GateKind, WeylOp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Gate(CliffordGate),
    Measure { observable: WeylOp, creg: usize },
    /// `branches[s]` is applied when the register holds s (empty = skip).
    CondGate { creg: usize, branches: Vec<Vec<CliffordGate>> },
    Noise { channel: NoiseChannel, sites: Vec<usize> },
    Barrier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    d: u32,
    n_qudits: usize,
    n_cregs: usize,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(d: u32, n_qudits: usize) -> Result<Self> {
        check_dim(d)?;
        if n_qudits == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qudit".into()));
        }
        Ok(Circuit { d, n_qudits, n_cregs: 0, instructions: Vec::new() })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_qudits(&self) -> usize {
        self.n_qudits
    }

    pub fn n_cregs(&self) -> usize {
        self.n_cregs
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn add_creg(&mut self) -> usize {
        self.n_cregs += 1;
        self.n_cregs - 1
    }

    pub fn push_gate(&mut self, g: CliffordGate) -> Result<()> {
        g.check_range(self.n_qudits)?;
        self.instructions.push(Instruction::Gate(g));
        Ok(())
    }

    pub fn gate1(&mut self, kind: GateKind, q: usize) -> Result<()> {
        self.push_gate(CliffordGate::new(kind, &[q])?)
    }

    pub fn gate2(&mut self, kind: GateKind, c: usize, t: usize) -> Result<()> {
        self.push_gate(CliffordGate::new(kind, &[c, t])?)
    }

    /// Appends gates implementing `w` up to a global phase.
    pub fn push_weyl(&mut self, w: &WeylOp) -> Result<()> {
        for g in weyl_to_gates(w) {
            self.push_gate(g)?;
        }
        Ok(())
    }

    /// Measures `w` into a fresh register and returns its index.
    pub fn measure(&mut self, w: WeylOp) -> Result<usize> {
        let c = self.add_creg();
        self.measure_into(w, c)?;
        Ok(c)
    }

    pub fn measure_into(&mut self, w: WeylOp, creg: usize) -> Result<()> {
        self.check_weyl(&w)?;
        w.check_unit_order()?;
        if creg >= self.n_cregs {
            return Err(Error::CregOutOfRange { index: creg, n: self.n_cregs });
        }
        self.instructions.push(Instruction::Measure { observable: w, creg });
        Ok(())
    }

    pub fn cond(&mut self, creg: usize, branches: Vec<Vec<CliffordGate>>) -> Result<()> {
        self.instructions.push(Instruction::CondGate { creg, branches });
        self.validate_last()
    }

    pub fn noise(&mut self, channel: NoiseChannel, sites: Vec<usize>) -> Result<()> {
        self.instructions.push(Instruction::Noise { channel, sites });
        self.validate_last()
    }

    pub fn barrier(&mut self) {
        self.instructions.push(Instruction::Barrier);
    }

    /// Appends another circuit on the same register, offsetting its classical registers.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.d != self.d || other.n_qudits != self.n_qudits {
            return Err(Error::ArityMismatch { left: self.n_qudits, right: other.n_qudits });
        }
        let off = self.n_cregs;
        for ins in &other.instructions {
            self.instructions.push(match ins {
                Instruction::Measure { observable, creg } => {
                    Instruction::Measure { observable: observable.clone(), creg: creg + off }
                }
                Instruction::CondGate { creg, branches } => {
                    Instruction::CondGate { creg: creg + off, branches: branches.clone() }
                }
                other => other.clone(),
            });
        }
        self.n_cregs += other.n_cregs;
        Ok(())
    }

    pub fn push(&mut self, ins: Instruction) -> Result<()> {
        if let Instruction::Measure { creg, .. } = &ins {
            while self.n_cregs <= *creg {
                self.add_creg();
            }
        }
        self.instructions.push(ins);
        self.validate_last()
    }

    fn validate_last(&mut self) -> Result<()> {
        let ins = self.instructions.last().cloned();
        if let Some(ins) = ins {
            let written = self.written_before(self.instructions.len() - 1);
            if let Err(e) = self.validate_instruction(&ins, &written) {
                self.instructions.pop();
                return Err(e);
            }
        }
        Ok(())
    }

    fn written_before(&self, end: usize) -> Vec<bool> {
        let mut w = vec![false; self.n_cregs];
        for ins in &self.instructions[..end] {
            if let Instruction::Measure { creg, .. } = ins {
                if *creg < w.len() {
                    w[*creg] = true;
                }
            }
        }
        w
    }

    fn check_weyl(&self, w: &WeylOp) -> Result<()> {
        if w.d() != self.d {
            return Err(Error::DimensionMismatch { left: self.d, right: w.d() });
        }
        if w.n() != self.n_qudits {
            return Err(Error::ArityMismatch { left: self.n_qudits, right: w.n() });
        }
        Ok(())
    }

    fn validate_instruction(&self, ins: &Instruction, written: &[bool]) -> Result<()> {
        match ins {
            Instruction::Gate(g) => g.check_range(self.n_qudits),
            Instruction::Measure { observable, creg } => {
                self.check_weyl(observable)?;
                observable.check_unit_order()?;
                if *creg >= self.n_cregs {
                    return Err(Error::CregOutOfRange { index: *creg, n: self.n_cregs });
                }
                Ok(())
            }
            Instruction::CondGate { creg, branches } => {
                if *creg >= self.n_cregs {
                    return Err(Error::CregOutOfRange { index: *creg, n: self.n_cregs });
                }
                if !written[*creg] {
                    return Err(Error::CregUnwritten(*creg));
                }
                if branches.len() != self.d as usize {
                    return Err(Error::MalformedCondition(format!(
                        "{} branches for d = {}",
                        branches.len(),
                        self.d
                    )));
                }
                branches.iter().flatten().try_for_each(|g| g.check_range(self.n_qudits))
            }
            Instruction::Noise { channel, sites } => {
                channel.validate(self.d, sites.len())?;
                for &s in sites {
                    if s >= self.n_qudits {
                        return Err(Error::TargetOutOfRange { index: s, n: self.n_qudits });
                    }
                }
                let mut sorted = sites.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != sites.len() {
                    return Err(Error::InvalidNoise("repeated noise site".into()));
                }
                Ok(())
            }
            Instruction::Barrier => Ok(()),
        }
    }

    /// Full structural validation (register order, predicate coverage, ranges).
    pub fn validate(&self) -> Result<()> {
        let mut written = vec![false; self.n_cregs];
        for ins in &self.instructions {
            self.validate_instruction(ins, &written)?;
            if let Instruction::Measure { creg, .. } = ins {
                written[*creg] = true;
            }
        }
        Ok(())
    }

    pub fn gates(&self) -> impl Iterator<Item = &CliffordGate> {
        self.instructions.iter().filter_map(|i| match i {
            Instruction::Gate(g) => Some(g),
            _ => None,
        })
    }

    /// True when the circuit only contains gates and barriers.
    pub fn is_unitary(&self) -> bool {
        self.instructions.iter().all(|i| matches!(i, Instruction::Gate(_) | Instruction::Barrier))
    }

    pub fn count_gates(&self, pred: impl Fn(&CliffordGate) -> bool) -> usize {
        self.gates().filter(|g| pred(g)).count()
    }

    /// Inverse of a unitary circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        if !self.is_unitary() {
            return Err(Error::InvalidArgument("only unitary circuits can be inverted".into()));
        }
        let mut out = Circuit::new(self.d, self.n_qudits)?;
        for ins in self.instructions.iter().rev() {
            out.instructions.push(match ins {
                Instruction::Gate(g) => Instruction::Gate(g.inverse()),
                other => other.clone(),
            });
        }
        Ok(out)
    }

    /// Interleaves a noise instruction after every two-qudit gate.
    pub fn with_gate_noise(&self, two: Option<&NoiseChannel>, one: Option<&NoiseChannel>) -> Result<Circuit> {
        let mut out = Circuit::new(self.d, self.n_qudits)?;
        out.n_cregs = self.n_cregs;
        for ins in &self.instructions {
            out.instructions.push(ins.clone());
            if let Instruction::Gate(g) = ins {
                let ch = if g.kind().arity() == 2 { two } else { one };
                if let Some(ch) = ch {
                    out.instructions.push(Instruction::Noise { channel: ch.clone(), sites: g.targets().to_vec() });
                }
            }
        }
        out.validate()?;
        Ok(out)
    }
}

/// Gates equal to `w` up to a global phase: Z^b then X^a per site.
pub fn weyl_to_gates(w: &WeylOp) -> Vec<CliffordGate> {
    let mut out = Vec::new();
    for s in w.support() {
        let (a, b) = w.site(s);
        for _ in 0..b {
            out.push(CliffordGate::one(GateKind::ClockZ, s));
        }
        for _ in 0..a {
            out.push(CliffordGate::one(GateKind::ShiftX, s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unwritten_creg() {
        let mut c = Circuit::new(3, 2).unwrap();
        let r = c.add_creg();
        assert!(matches!(c.cond(r, vec![vec![], vec![], vec![]]), Err(Error::CregUnwritten(0))));
        c.measure_into(WeylOp::z_on(3, 2, 0).unwrap(), r).unwrap();
        assert!(matches!(c.cond(r, vec![vec![], vec![]]), Err(Error::MalformedCondition(_))));
        c.cond(r, vec![vec![], vec![CliffordGate::one(GateKind::ShiftX, 1)], vec![]]).unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn append_offsets_registers() {
        let mut a = Circuit::new(3, 1).unwrap();
        a.measure(WeylOp::z_on(3, 1, 0).unwrap()).unwrap();
        let mut b = a.clone();
        b.append(&a).unwrap();
        assert_eq!(b.n_cregs(), 2);
        match &b.instructions()[1] {
            Instruction::Measure { creg, .. } => assert_eq!(*creg, 1),
            _ => panic!(),
        }
    }

    #[test]
    fn weyl_gates_roundtrip() {
        let w = WeylOp::from_signed(3, &[2, 0, 1], &[1, 1, 0], 0).unwrap();
        let gs = weyl_to_gates(&w);
        assert_eq!(gs.len(), 5);
    }
}
