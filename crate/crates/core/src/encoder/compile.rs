use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::decompose::{decompose_gate, zz_budget, QutritGate};
use super::native::NativeGate;
use super::qcircuit::{QubitCircuit, QubitInstruction};
use crate::circuit::{Circuit, Instruction};
use crate::error::{Error, Result};
use crate::weyl::{CliffordGate, WeylOp};

/// Order in which commuting qutrit gates are issued before lowering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    /// Program order.
    #[default]
    GreedyAsap,
    /// Layered list scheduling, earlier instructions first.
    PlaquetteParallel,
    /// Layered list scheduling by entangling-gate round (k-th gate of each control).
    GateParallel,
}

impl SchedulePolicy {
    pub const ALL: [SchedulePolicy; 3] =
        [SchedulePolicy::GreedyAsap, SchedulePolicy::PlaquetteParallel, SchedulePolicy::GateParallel];
}

/// Basis of a terminal measure-all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureBasis {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub policy: SchedulePolicy,
    /// Appends a barrier and a destructive measurement of every qutrit.
    pub final_measure: Option<MeasureBasis>,
    /// Uses state preparation on fresh qutrits, drops diagonal gates there, and
    /// cancels or merges adjacent single-qutrit gates.
    pub peephole: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { policy: SchedulePolicy::GreedyAsap, final_measure: None, peephole: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub gate: String,
    pub count: usize,
    pub zz_per_gate: usize,
    pub zz_total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldStats {
    pub shots: usize,
    pub discarded: usize,
    pub discard_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub policy: SchedulePolicy,
    pub n_qutrits: usize,
    pub n_qubits: usize,
    pub two_qubit_count: usize,
    pub one_qubit_count: usize,
    pub measure_count: usize,
    /// Longest chain of native gates sharing a qubit; barriers cut layers.
    pub depth: usize,
    /// Same chain length counting only ZZPhase gates.
    pub two_qubit_depth: usize,
    pub budget: Vec<BudgetRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herald: Option<HeraldStats>,
}

/// Compiled circuit plus, for every qubit instruction, the index of the qutrit
/// instruction it came from (`n_instructions` for the terminal measure-all).
#[derive(Clone, Debug, PartialEq)]
pub struct Compiled {
    pub circuit: QubitCircuit,
    pub report: CompileReport,
    pub origins: Vec<usize>,
}

type Branch = Vec<(QutritGate, Vec<usize>)>;

#[derive(Clone, Debug, PartialEq)]
enum QOp {
    Gate { g: QutritGate, q: Vec<usize>, origin: usize },
    Measure { qutrit: usize, creg: usize, table: [u8; 3], origin: usize },
    Cond { creg: usize, branches: Vec<Branch>, origin: usize },
    Barrier { origin: usize },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Diagonal,
    Shift,
    Other,
}

impl QOp {
    /// Qutrits touched; None means every qutrit.
    fn qutrits(&self) -> Option<&[usize]> {
        match self {
            QOp::Gate { q, .. } => Some(q),
            _ => None,
        }
    }

    fn role(&self, qutrit: usize) -> Role {
        let QOp::Gate { g, q, .. } = self else { return Role::Other };
        use QutritGate::*;
        match g {
            Z | Zdag | Phase(_) | CZ | CZdag => Role::Diagonal,
            X | Xdag => Role::Shift,
            CX | CXdag if q[0] == qutrit => Role::Diagonal,
            CX | CXdag => Role::Shift,
            _ => Role::Other,
        }
    }
}

fn shares(a: &QOp, b: &QOp) -> Vec<usize> {
    match (a.qutrits(), b.qutrits()) {
        (Some(x), Some(y)) => x.iter().copied().filter(|s| y.contains(s)).collect(),
        _ => vec![usize::MAX],
    }
}

fn commute(a: &QOp, b: &QOp) -> bool {
    shares(a, b).iter().all(|&s| s != usize::MAX && a.role(s) == b.role(s) && a.role(s) != Role::Other)
}

/// Diagonal D with D·W·D† = ω^c X^x for a single-site W = X^x Z^z, x ≠ 0.
fn diagonalizer(x: u8, z: u8) -> ([u8; 3], u8) {
    for d1 in 0..3u8 {
        for d2 in 0..3u8 {
            let d = [0, d1, d2];
            let c: Vec<u8> = (0..3).map(|m| (z * m as u8 + 3 - d[m] + d[(m + x as usize) % 3]) % 3).collect();
            if c[0] == c[1] && c[1] == c[2] {
                return (d, c[0]);
            }
        }
    }
    unreachable!("a quadratic phase always straightens X^x Z^z")
}

fn lower_gate(g: &CliffordGate) -> (QutritGate, Vec<usize>) {
    (QutritGate::from_kind(g.kind()), g.targets().to_vec())
}

/// Measurement of a single-site Weyl operator as basis change, Z readout and undo.
fn lower_measure(w: &WeylOp, creg: usize, origin: usize, out: &mut Vec<QOp>) -> Result<()> {
    let support = w.support();
    if support.len() != 1 {
        return Err(Error::Unsupported(format!("measurement of {} on {} qutrits", w.label(), support.len())));
    }
    let s = support[0];
    let (x, z) = w.site(s);
    let p = w.phase();
    if x == 0 {
        let table = [0u8, 1, 2].map(|m| (p + z * m) % 3);
        out.push(QOp::Measure { qutrit: s, creg, table, origin });
        return Ok(());
    }
    let (d, c) = diagonalizer(x, z);
    let gate = |g: QutritGate| QOp::Gate { g, q: vec![s], origin };
    let dg = QutritGate::from_diagonal(d);
    if let Some(g) = dg {
        out.push(gate(g));
    }
    out.push(gate(QutritGate::H));
    let table = [0u8, 1, 2].map(|m| (p + c + x * m) % 3);
    out.push(QOp::Measure { qutrit: s, creg, table, origin });
    out.push(gate(QutritGate::Hdag));
    if let Some(g) = dg {
        out.push(gate(g.inverse()));
    }
    Ok(())
}

fn lower(c: &Circuit, final_measure: Option<MeasureBasis>) -> Result<(Vec<QOp>, usize)> {
    let mut ops = Vec::new();
    for (i, ins) in c.instructions().iter().enumerate() {
        match ins {
            Instruction::Gate(g) => {
                let (g, q) = lower_gate(g);
                ops.push(QOp::Gate { g, q, origin: i });
            }
            Instruction::Measure { observable, creg } => lower_measure(observable, *creg, i, &mut ops)?,
            Instruction::CondGate { creg, branches } => {
                let branches = branches.iter().map(|b| b.iter().map(lower_gate).collect()).collect();
                ops.push(QOp::Cond { creg: *creg, branches, origin: i });
            }
            Instruction::Noise { .. } => {}
            Instruction::Barrier => ops.push(QOp::Barrier { origin: i }),
        }
    }
    let mut n_cregs = c.n_cregs();
    if let Some(basis) = final_measure {
        let origin = c.len();
        if basis == MeasureBasis::X {
            for s in 0..c.n_qudits() {
                ops.push(QOp::Gate { g: QutritGate::H, q: vec![s], origin });
            }
        }
        ops.push(QOp::Barrier { origin });
        for s in 0..c.n_qudits() {
            ops.push(QOp::Measure { qutrit: s, creg: n_cregs, table: [0, 1, 2], origin });
            n_cregs += 1;
        }
    }
    Ok((ops, n_cregs))
}

fn schedule(ops: Vec<QOp>, policy: SchedulePolicy) -> Vec<QOp> {
    if policy == SchedulePolicy::GreedyAsap || ops.len() < 2 {
        return ops;
    }
    let n = ops.len();
    let deps: Vec<Vec<usize>> =
        (0..n).map(|j| (0..j).filter(|&i| !shares(&ops[i], &ops[j]).is_empty() && !commute(&ops[i], &ops[j])).collect()).collect();
    let mut round = vec![0usize; n];
    if policy == SchedulePolicy::GateParallel {
        let mut per_control: BTreeMap<usize, usize> = BTreeMap::new();
        for (j, op) in ops.iter().enumerate() {
            if let QOp::Gate { q, .. } = op {
                if q.len() == 2 {
                    let k = per_control.entry(q[0]).or_default();
                    round[j] = *k;
                    *k += 1;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (round[j], j));
    let mut done = vec![false; n];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut layer = Vec::new();
        let mut busy: Vec<usize> = Vec::new();
        let mut all_busy = false;
        for &j in &order {
            if done[j] || all_busy || !deps[j].iter().all(|&i| done[i]) {
                continue;
            }
            match ops[j].qutrits() {
                Some(q) if q.iter().all(|s| !busy.contains(s)) => {
                    busy.extend_from_slice(q);
                    layer.push(j);
                }
                None if layer.is_empty() => {
                    layer.push(j);
                    all_busy = true;
                }
                _ => {}
            }
        }
        for &j in &layer {
            done[j] = true;
        }
        out.extend(layer);
    }
    let mut slots: Vec<Option<QOp>> = ops.into_iter().map(Some).collect();
    out.into_iter().map(|j| slots[j].take().expect("scheduled once")).collect()
}

fn expand_cx(ops: Vec<QOp>) -> Vec<QOp> {
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        match op {
            QOp::Gate { g: g @ (QutritGate::CX | QutritGate::CXdag), q, origin } => {
                let cz = if g == QutritGate::CX { QutritGate::CZ } else { QutritGate::CZdag };
                out.push(QOp::Gate { g: QutritGate::H, q: vec![q[1]], origin });
                out.push(QOp::Gate { g: cz, q: q.clone(), origin });
                out.push(QOp::Gate { g: QutritGate::Hdag, q: vec![q[1]], origin });
            }
            op => out.push(op),
        }
    }
    out
}

/// Drops diagonal gates on qutrits still in |0⟩ and marks Fourier gates there as preparations.
fn mark_fresh(ops: Vec<QOp>, n: usize) -> Vec<QOp> {
    let mut fresh = vec![true; n];
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        match op {
            QOp::Gate { g, q, origin } => {
                if q.iter().any(|&s| fresh[s]) && (g.diagonal().is_some() || matches!(g, QutritGate::CZ | QutritGate::CZdag)) {
                    continue;
                }
                let g = if matches!(g, QutritGate::H | QutritGate::Hdag) && fresh[q[0]] { QutritGate::Mprep } else { g };
                for &s in &q {
                    fresh[s] = false;
                }
                out.push(QOp::Gate { g, q, origin });
            }
            QOp::Measure { qutrit, .. } => {
                fresh[qutrit] = false;
                out.push(op);
            }
            QOp::Cond { ref branches, .. } => {
                for (_, q) in branches.iter().flatten() {
                    for &s in q {
                        fresh[s] = false;
                    }
                }
                out.push(op);
            }
            QOp::Barrier { .. } => out.push(op),
        }
    }
    out
}

/// Result of fusing two adjacent single-qutrit gates: None = no rule applies.
fn fuse(a: QutritGate, b: QutritGate) -> Option<Option<QutritGate>> {
    use QutritGate::*;
    if let (Some(x), Some(y)) = (a.diagonal(), b.diagonal()) {
        return Some(QutritGate::from_diagonal([0, 1, 2].map(|i| (x[i] + y[i]) % 3)));
    }
    match (a, b) {
        (H, Hdag) | (Hdag, H) | (Mprep, Hdag) | (Mprep, H) | (C, C) | (X, Xdag) | (Xdag, X) => Some(None),
        (H, H) | (Hdag, Hdag) => Some(Some(C)),
        (X, X) => Some(Some(Xdag)),
        (Xdag, Xdag) => Some(Some(X)),
        _ => None,
    }
}

fn peephole(ops: Vec<QOp>) -> Vec<QOp> {
    let mut slots: Vec<Option<QOp>> = ops.into_iter().map(Some).collect();
    let touches = |op: &QOp, s: usize| match op {
        QOp::Gate { q, .. } => q.contains(&s),
        QOp::Measure { qutrit, .. } => *qutrit == s,
        QOp::Cond { branches, .. } => branches.iter().flatten().any(|(_, q)| q.contains(&s)),
        QOp::Barrier { .. } => true,
    };
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..slots.len() {
            let Some(QOp::Gate { g: a, q, .. }) = &slots[i] else { continue };
            if q.len() != 1 {
                continue;
            }
            let (a, s) = (*a, q[0]);
            let Some(j) = (i + 1..slots.len()).find(|&j| slots[j].as_ref().is_some_and(|op| touches(op, s))) else {
                continue;
            };
            let Some(QOp::Gate { g: b, q: qb, origin }) = &slots[j] else { continue };
            if qb.len() != 1 {
                continue;
            }
            if let Some(merged) = fuse(a, *b) {
                let origin = *origin;
                slots[i] = None;
                slots[j] = merged.map(|g| QOp::Gate { g, q: vec![s], origin });
                changed = true;
            }
        }
    }
    slots.into_iter().flatten().collect()
}

fn pair(s: usize) -> [usize; 2] {
    [2 * s, 2 * s + 1]
}

fn gate_qubits(q: &[usize]) -> Vec<usize> {
    q.iter().flat_map(|&s| pair(s)).collect()
}

/// ASAP layering of native gates; returns (depth, ZZ depth).
fn depth(c: &QubitCircuit) -> (usize, usize) {
    let mut level = vec![(0usize, 0usize); c.n_qubits];
    let place = |level: &mut Vec<(usize, usize)>, g: &NativeGate| {
        let qs = g.qubits();
        let d = qs.iter().map(|&q| level[q].0).max().unwrap_or(0) + 1;
        let z = qs.iter().map(|&q| level[q].1).max().unwrap_or(0) + usize::from(g.is_two_qubit());
        for q in qs {
            level[q] = (d, z);
        }
    };
    for ins in &c.instructions {
        match ins {
            QubitInstruction::Gate(g) => place(&mut level, g),
            QubitInstruction::Cond { branches, .. } => {
                let start = level.clone();
                for b in branches {
                    let mut l = start.clone();
                    for g in b {
                        place(&mut l, g);
                    }
                    for (dst, src) in level.iter_mut().zip(l) {
                        *dst = (dst.0.max(src.0), dst.1.max(src.1));
                    }
                }
            }
            QubitInstruction::Barrier => {
                let m = level.iter().fold((0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
                level.iter_mut().for_each(|l| *l = m);
            }
            QubitInstruction::Decode { .. } => {}
        }
    }
    level.iter().fold((0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// Full compilation with per-instruction provenance.
pub fn compile(c: &Circuit, opts: &CompileOptions) -> Result<Compiled> {
    if c.d() != 3 {
        return Err(Error::Unsupported(format!("two-qubit encoding needs d = 3, got {}", c.d())));
    }
    let n = c.n_qudits();
    let (ops, n_cregs) = lower(c, opts.final_measure)?;
    let ops = expand_cx(schedule(ops, opts.policy));
    let ops = if opts.peephole { peephole(mark_fresh(ops, n)) } else { ops };

    let mut qc = QubitCircuit::new(2 * n);
    qc.n_cregs = n_cregs;
    let mut origins = Vec::new();
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut tally = |g: QutritGate| {
        let e = counts.entry(g.name()).or_insert((0, zz_budget(g)));
        e.0 += 1;
    };
    for op in ops {
        match op {
            QOp::Gate { g, q, origin } => {
                tally(g);
                for x in decompose_gate(g, &gate_qubits(&q))? {
                    qc.instructions.push(QubitInstruction::Gate(x));
                    origins.push(origin);
                }
            }
            QOp::Measure { qutrit, creg, table, origin } => {
                let clbits = [qc.n_clbits, qc.n_clbits + 1];
                qc.n_clbits += 2;
                for (q, clbit) in pair(qutrit).into_iter().zip(clbits) {
                    qc.instructions.push(QubitInstruction::Gate(NativeGate::MeasureZ { q, clbit }));
                    origins.push(origin);
                }
                qc.instructions.push(QubitInstruction::Decode { clbits, creg, table });
                origins.push(origin);
            }
            QOp::Cond { creg, branches, origin } => {
                let mut nb = Vec::with_capacity(branches.len());
                for b in branches {
                    let mut natives = Vec::new();
                    for (g, q) in expand_branch(b) {
                        tally(g);
                        natives.extend(decompose_gate(g, &gate_qubits(&q))?);
                    }
                    nb.push(natives);
                }
                qc.instructions.push(QubitInstruction::Cond { creg, branches: nb });
                origins.push(origin);
            }
            QOp::Barrier { origin } => {
                qc.instructions.push(QubitInstruction::Barrier);
                origins.push(origin);
            }
        }
    }
    qc.validate()?;
    let gates = qc.gates();
    let two = gates.iter().filter(|g| g.is_two_qubit()).count();
    let meas = gates.iter().filter(|g| !g.is_unitary()).count();
    let (depth, two_qubit_depth) = depth(&qc);
    let budget = counts
        .into_iter()
        .map(|(gate, (count, zz))| BudgetRow { gate, count, zz_per_gate: zz, zz_total: count * zz })
        .collect();
    let report = CompileReport {
        policy: opts.policy,
        n_qutrits: n,
        n_qubits: 2 * n,
        two_qubit_count: two,
        one_qubit_count: gates.len() - two - meas,
        measure_count: meas,
        depth,
        two_qubit_depth,
        budget,
        herald: None,
    };
    Ok(Compiled { circuit: qc, report, origins })
}

fn expand_branch(b: Branch) -> Branch {
    let ops = b.into_iter().map(|(g, q)| QOp::Gate { g, q, origin: 0 }).collect();
    expand_cx(ops)
        .into_iter()
        .map(|op| match op {
            QOp::Gate { g, q, .. } => (g, q),
            _ => unreachable!("branches hold gates only"),
        })
        .collect()
}

/// Compiles a qutrit circuit to the encoded native gate set.
pub fn encode_circuit(c: &Circuit, policy: SchedulePolicy) -> Result<(QubitCircuit, CompileReport)> {
    let out = compile(c, &CompileOptions { policy, ..CompileOptions::default() })?;
    Ok((out.circuit, out.report))
}

/// ZZPhase gates per source instruction, as (instruction, qutrit a, qutrit b).
/// Gates inside conditional branches are not included.
pub fn zz_placements(compiled: &Compiled) -> Vec<(usize, usize, usize)> {
    compiled
        .circuit
        .instructions
        .iter()
        .zip(&compiled.origins)
        .filter_map(|(ins, &o)| match ins {
            QubitInstruction::Gate(NativeGate::ZzPhase { a, b, .. }) => Some((o, a / 2, b / 2)),
            _ => None,
        })
        .collect()
}
