use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anyons::{anyon_string, drag_operator, hop_operator};
use super::checks::{CheckKind, CheckSet, Frame, SnapshotAccumulator, Species};
use super::defects::{cc_defect, fuse_cc_pair, pf_defect, DefectKind, DefectSpec, PfLine, Ribbon, LOCAL_WEIGHT};
use super::lattice::TorusLattice;
use super::prep::default_ground_state;
use crate::circuit::{run_shot_with, shot_seed, Circuit, Instruction, NoiseChannel};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::weyl::WeylOp;

/// One scripted action. Sites are given as (x, y) lattice coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Prepare,
    /// Applies ∏ X^a Z^b over (x, y, a, b) factors.
    Apply { factors: Vec<(i64, i64, i64, i64)> },
    /// Anyon string whose last site carries `species`.
    String { species: Species, path: Vec<(i64, i64)> },
    /// Moves the excitation sitting on check `from` onto check `to`.
    Move { from: String, to: String },
    /// Drags the excitation on check `from` across each listed site in turn.
    Drag { from: String, path: Vec<(i64, i64)> },
    PfDefect { name: String, kind: DefectKind, line: PfLine },
    CcDefect { name: String, ribbon: Ribbon },
    /// Re-applies a CC unitary, fusing its pair.
    CcFuse { name: String },
    Snapshot { tag: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub name: String,
    pub lx: usize,
    pub ly: usize,
    pub steps: Vec<Step>,
}

/// Checks to evaluate after a given number of circuit instructions.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMark {
    pub tag: String,
    pub instructions: usize,
    pub checks: CheckSet,
}

/// Circuit plus the check bookkeeping of every tagged step.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub lattice: TorusLattice,
    pub circuit: Circuit,
    pub checks: CheckSet,
    pub defects: Vec<DefectSpec>,
    pub marks: Vec<FrameMark>,
    probe: StabilizerTableau,
    probe_regs: Vec<u8>,
    executed: usize,
}

impl Experiment {
    pub fn new(lattice: TorusLattice) -> Result<Self> {
        let circuit = Circuit::new(lattice.d(), lattice.n_qudits())?;
        let probe = StabilizerTableau::new_computational(lattice.d(), lattice.n_qudits())?.with_seed(0x5eed);
        Ok(Experiment {
            checks: CheckSet::plaquettes(&lattice),
            lattice,
            circuit,
            defects: Vec::new(),
            marks: Vec::new(),
            probe,
            probe_regs: Vec::new(),
            executed: 0,
        })
    }

    pub fn from_script(script: &Script) -> Result<Self> {
        let mut e = Experiment::new(TorusLattice::new(script.lx, script.ly)?)?;
        for step in &script.steps {
            e.step(step)?;
        }
        Ok(e)
    }

    pub fn step(&mut self, step: &Step) -> Result<()> {
        match step {
            Step::Prepare => self.prepare(),
            Step::Apply { factors } => {
                let w = self.factors_op(factors)?;
                self.apply(&w)
            }
            Step::String { species, path } => {
                let sites: Vec<usize> = path.iter().map(|&(x, y)| self.lattice.site_index(x, y)).collect();
                let s = anyon_string(&self.lattice, *species, &sites)?;
                self.apply(&s.operator)
            }
            Step::Move { from, to } => self.move_anyon(from, to).map(|_| ()),
            Step::Drag { from, path } => self.drag(from, path).map(|_| ()),
            Step::PfDefect { name, kind, line } => self.pf_defect(name, *kind, *line).map(|_| ()),
            Step::CcDefect { name, ribbon } => self.cc_defect(name, *ribbon).map(|_| ()),
            Step::CcFuse { name } => self.cc_fuse(name),
            Step::Snapshot { tag } => self.snapshot(tag),
        }
    }

    fn factors_op(&self, factors: &[(i64, i64, i64, i64)]) -> Result<WeylOp> {
        let f: Vec<(usize, i64, i64)> = factors.iter().map(|&(x, y, a, b)| (self.lattice.site_index(x, y), a, b)).collect();
        WeylOp::from_factors(self.lattice.d(), self.lattice.n_qudits(), &f)
    }

    /// Brings the build-time tableau up to date with the circuit.
    fn sync(&mut self) -> Result<()> {
        self.probe_regs.resize(self.circuit.n_cregs(), 0);
        for ins in &self.circuit.instructions()[self.executed..] {
            match ins {
                Instruction::Gate(g) => self.probe.apply_gate(g)?,
                Instruction::Measure { observable, creg } => {
                    self.probe_regs[*creg] = self.probe.measure_weyl(observable)?.value;
                }
                Instruction::CondGate { creg, branches } => {
                    self.probe.apply_gates(&branches[self.probe_regs[*creg] as usize])?;
                }
                Instruction::Noise { .. } | Instruction::Barrier => {}
            }
        }
        self.executed = self.circuit.len();
        Ok(())
    }

    /// Noiseless state after everything appended so far.
    pub fn state(&mut self) -> Result<&StabilizerTableau> {
        self.sync()?;
        Ok(&self.probe)
    }

    /// Current eigenvalue exponent of a check, if sharp.
    pub fn value(&mut self, label: &str) -> Result<Option<u8>> {
        let op = self.checks.get(label)?.op.clone();
        Ok(self.state()?.expectation_weyl(&op)?.root())
    }

    pub fn prepare(&mut self) -> Result<()> {
        let c = default_ground_state(&self.lattice)?;
        self.circuit.append(&c)?;
        self.sync()
    }

    pub fn apply(&mut self, w: &WeylOp) -> Result<()> {
        self.circuit.push_weyl(w)?;
        self.sync()
    }

    /// Moves the anyon on `from` to `to` with a short operator and returns that operator.
    pub fn move_anyon(&mut self, from: &str, to: &str) -> Result<WeylOp> {
        let d = self.lattice.d();
        let k = self.value(from)?.ok_or_else(|| Error::InvalidPath(format!("{from} is not sharp")))?;
        if k == 0 {
            return Err(Error::InvalidPath(format!("no anyon on {from}")));
        }
        let op = hop_operator(&self.checks, d, self.lattice.n_qudits(), from, to, (d as u8 - k) % d as u8)?;
        self.apply(&op)?;
        Ok(op)
    }

    /// Drags the anyon on `from` over the given sites, one single-site operator per step.
    /// Returns the label of the check hosting it at the end and the product of the steps.
    pub fn drag(&mut self, from: &str, path: &[(i64, i64)]) -> Result<(String, WeylOp)> {
        let d = self.lattice.d();
        let mut host = from.to_string();
        let mut total = WeylOp::identity(d, self.lattice.n_qudits())?;
        for &(x, y) in path {
            let k = self.value(&host)?.ok_or_else(|| Error::InvalidPath(format!("{host} is not sharp")))?;
            if k == 0 {
                return Err(Error::InvalidPath(format!("no anyon on {host}")));
            }
            let site = self.lattice.site_index(x, y);
            let (next, op) = drag_operator(&self.checks, d, self.lattice.n_qudits(), &host, site, (d as u8 - k) % d as u8)?;
            self.apply(&op)?;
            total = total.compose(&op)?;
            host = next;
        }
        Ok((host, total))
    }

    pub fn pf_defect(&mut self, name: &str, kind: DefectKind, line: PfLine) -> Result<&DefectSpec> {
        let spec = pf_defect(&self.lattice, &mut self.checks, &mut self.circuit, kind, line, name)?;
        self.sync()?;
        self.defects.push(spec);
        Ok(self.defects.last().expect("pushed"))
    }

    pub fn cc_defect(&mut self, name: &str, ribbon: Ribbon) -> Result<&DefectSpec> {
        let spec = cc_defect(&self.lattice, &mut self.checks, &mut self.circuit, ribbon, name)?;
        self.sync()?;
        self.defects.push(spec);
        Ok(self.defects.last().expect("pushed"))
    }

    pub fn defect(&self, name: &str) -> Result<&DefectSpec> {
        self.defects
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::InvalidDefect(format!("unknown defect {name}")))
    }

    pub fn cc_fuse(&mut self, name: &str) -> Result<()> {
        let spec = self.defect(name)?.clone();
        let c = fuse_cc_pair(&self.lattice, &spec)?;
        self.checks.conjugate(&spec.gates, LOCAL_WEIGHT)?;
        for l in &spec.endpoint_labels {
            let c = self.checks.get(l)?;
            if c.origin.as_ref() == Some(&c.op) {
                self.checks.set_kind(l, CheckKind::Plaquette)?;
            }
        }
        self.circuit.append(&c)?;
        self.sync()
    }

    pub fn snapshot(&mut self, tag: &str) -> Result<()> {
        if self.circuit.is_empty() {
            return Err(Error::InvalidArgument("snapshot before any circuit step".into()));
        }
        self.marks.push(FrameMark { tag: tag.to_string(), instructions: self.circuit.len(), checks: self.checks.clone() });
        Ok(())
    }

    /// Frames of one noiseless run with the given seed.
    pub fn run_noiseless(&self, seed: u64) -> Result<Vec<Frame>> {
        let mut acc: Vec<SnapshotAccumulator> = self.accumulators();
        let positions: Vec<usize> = self.marks.iter().map(|m| m.instructions).collect();
        record_shot(&self.circuit, &positions, seed, &mut acc)?;
        Ok(self.finish(&acc))
    }

    /// Frames averaged over `shots` noisy trajectories; each frame holds the exact
    /// per-trajectory expectations averaged over shots.
    pub fn run_noisy(
        &self,
        two: Option<&NoiseChannel>,
        one: Option<&NoiseChannel>,
        shots: usize,
        base_seed: u64,
    ) -> Result<Vec<Frame>> {
        let noisy = self.circuit.with_gate_noise(two, one)?;
        let mut map = Vec::with_capacity(self.circuit.len() + 1);
        map.push(0);
        for (i, ins) in noisy.instructions().iter().enumerate() {
            if !matches!(ins, Instruction::Noise { .. }) {
                map.push(i + 1);
            }
        }
        // a noise instruction right after a gate belongs before the frame boundary
        let positions: Vec<usize> = self
            .marks
            .iter()
            .map(|m| {
                let mut p = map[m.instructions];
                while p < noisy.len() && matches!(noisy.instructions()[p], Instruction::Noise { .. }) {
                    p += 1;
                }
                p
            })
            .collect();
        let acc = (0..shots)
            .into_par_iter()
            .try_fold(
                || self.accumulators(),
                |mut acc, i| {
                    record_shot(&noisy, &positions, shot_seed(base_seed, i as u64), &mut acc)?;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || self.accumulators(),
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        x.merge(y);
                    }
                    Ok(a)
                },
            )?;
        Ok(self.finish(&acc))
    }

    fn accumulators(&self) -> Vec<SnapshotAccumulator> {
        self.marks.iter().map(|m| SnapshotAccumulator::new(&m.checks, self.lattice.d())).collect()
    }

    fn finish(&self, acc: &[SnapshotAccumulator]) -> Vec<Frame> {
        self.marks.iter().zip(acc).map(|(m, a)| Frame { step: m.tag.clone(), snapshots: a.finish() }).collect()
    }

    /// Labels of checks whose operator changed between two marks.
    pub fn changed_checks(&self, a: usize, b: usize) -> Vec<String> {
        let (ma, mb) = (&self.marks[a].checks, &self.marks[b].checks);
        mb.checks()
            .iter()
            .filter(|c| ma.get(&c.label).map(|o| o.op != c.op).unwrap_or(true))
            .map(|c| c.label.clone())
            .collect()
    }

    /// Checks that describe defects rather than plain plaquettes.
    pub fn defect_checks(&self) -> Vec<String> {
        self.checks.checks().iter().filter(|c| c.kind != CheckKind::Plaquette).map(|c| c.label.clone()).collect()
    }
}

/// Adds one trajectory to `acc` unless the shot was heralded as leaked.
fn record_shot(c: &Circuit, positions: &[usize], seed: u64, acc: &mut [SnapshotAccumulator]) -> Result<bool> {
    let mut err = None;
    let mut states: Vec<Option<StabilizerTableau>> = vec![None; positions.len()];
    let rec = {
        let mut hook = |idx: usize, t: &StabilizerTableau| {
            for (p, slot) in positions.iter().zip(states.iter_mut()) {
                if *p == idx + 1 {
                    *slot = Some(t.clone());
                }
            }
        };
        run_shot_with(c, seed, Some(&mut hook))?.0
    };
    if rec.herald_discard {
        return Ok(false);
    }
    for (slot, a) in states.iter().zip(acc.iter_mut()) {
        match slot {
            Some(t) => a.add(t)?,
            None => err = Some(Error::Invariant("frame position never reached".into())),
        }
    }
    match err {
        Some(e) => Err(e),
        None => Ok(true),
    }
}
