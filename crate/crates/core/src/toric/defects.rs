use serde::{Deserialize, Serialize};

use super::anyons::solve_on_sites;
use super::checks::{Check, CheckKind, CheckSet};
use super::lattice::{PlaquetteType, TorusLattice};
use crate::circuit::{weyl_to_gates, Circuit};
use crate::error::{Error, Result};
use crate::modular;
use crate::tableau::StabilizerTableau;
use crate::weyl::{CliffordGate, GateKind, WeylOp};

/// Transformed plaquettes up to this weight stay local excitation sites.
pub const LOCAL_WEIGHT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Pf,
    PfStar,
    Cc,
}

impl DefectKind {
    pub fn name(self) -> &'static str {
        match self {
            DefectKind::Pf => "PF",
            DefectKind::PfStar => "PF*",
            DefectKind::Cc => "CC",
        }
    }
}

/// A created defect pair and the checks that describe it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub kind: DefectKind,
    pub name: String,
    /// Measured sites (PF, PF*) or the ribbon sites s_i (CC).
    pub sites: Vec<usize>,
    /// Partner sites σ_i of a CC ribbon; empty for PF lines.
    pub sigma: Vec<usize>,
    pub endpoint_labels: Vec<String>,
    pub nonlocal_labels: Vec<String>,
    pub endpoint_stabilizers: Vec<WeylOp>,
    pub nonlocal_stabilizers: Vec<WeylOp>,
    /// Unitary creating a CC pair; re-applying it fuses the pair.
    pub gates: Vec<CliffordGate>,
}

/// Fusion-channel labels |e^a, m^b⟩ of a CC pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectInternalState {
    pub e_charge: u8,
    pub m_charge: u8,
}

/// Horizontal run of `len` measured sites starting at (col, row).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfLine {
    pub col: usize,
    pub row: usize,
    pub len: usize,
}

/// Diagonal CC ribbon: s_i = (x0 + i, y0 − i) with partner σ_i directly above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ribbon {
    pub x0: i64,
    pub y0: i64,
    pub len: usize,
}

/// Measured observable at a line site: XZ on odd sites and XZ† on even ones for PF,
/// the opposite for PF*.
pub fn pf_observable(lattice: &TorusLattice, kind: DefectKind, site: usize) -> Result<WeylOp> {
    let (x, y) = lattice.coords(site);
    let odd = (x + y) % 2 == 1;
    let z = match (kind, odd) {
        (DefectKind::Pf, true) | (DefectKind::PfStar, false) => 1,
        (DefectKind::Pf, false) | (DefectKind::PfStar, true) => -1,
        (DefectKind::Cc, _) => return Err(Error::InvalidDefect("CC defects are not measured".into())),
    };
    WeylOp::single(lattice.d(), lattice.n_qudits(), site, 1, z)
}

/// Product ∏ P_j^{k_j} of `ops` with exponents from the null space of their symplectic
/// products with `measured`, normalised so the first non-zero exponent is 1.
fn fuse(ops: &[&WeylOp], measured: &[WeylOp], d: u32) -> Result<WeylOp> {
    let d8 = d as u8;
    let rows: Vec<Vec<u8>> = measured
        .iter()
        .map(|y| ops.iter().map(|p| p.symplectic_product(y)).collect::<Result<Vec<u8>>>())
        .collect::<Result<_>>()?;
    let basis = modular::null_space(&rows, ops.len(), d8);
    let v = basis.first().ok_or_else(|| Error::InvalidDefect("no commuting product of the cut checks".into()))?;
    let lead = *v.iter().find(|&&c| c != 0).expect("null vectors are non-zero");
    let scale = modular::inv(lead, d8);
    let mut acc = WeylOp::identity(d, ops[0].n())?;
    for (p, &k) in ops.iter().zip(v) {
        acc = acc.compose(&p.pow(modular::mul(k, scale, d8) as i64))?;
    }
    Ok(acc)
}

/// Removes the measured sites from `f` by multiplying with powers of their observables.
/// Returns the stripped operator and the power t_i taken from each observable.
fn strip(f: &WeylOp, sites: &[usize], measured: &[WeylOp], d: u32) -> Result<(WeylOp, Vec<u8>)> {
    let mut out = f.clone();
    let mut powers = Vec::with_capacity(sites.len());
    for (&s, y) in sites.iter().zip(measured) {
        let (a, _) = out.site(s);
        out = out.compose(&y.pow(-(a as i64)))?;
        if out.site(s) != (0, 0) {
            return Err(Error::Invariant(format!("fused check not proportional to the observable at site {s}")));
        }
        powers.push(a % d as u8);
    }
    Ok((out, powers))
}

/// Creates a PF or PF* pair by measuring a horizontal line of sites, with feed-forward
/// that puts every fused check in its +1 eigenspace.
///
/// The plaquettes above and below the line are replaced by fused checks, one per
/// column of the cut (`name.E0`, `name.C{j}`, `name.E1`), a nonlocal check joining
/// the row above (`name.N`) and the measured observables (`name.Y{i}`).
pub fn pf_defect(
    lattice: &TorusLattice,
    checks: &mut CheckSet,
    circuit: &mut Circuit,
    kind: DefectKind,
    line: PfLine,
    name: &str,
) -> Result<DefectSpec> {
    if kind == DefectKind::Cc {
        return Err(Error::InvalidDefect("use cc_defect for CC pairs".into()));
    }
    if line.len == 0 || line.len + 1 >= lattice.lx() {
        return Err(Error::InvalidDefect(format!("line of length {} does not fit", line.len)));
    }
    let d = lattice.d();
    let (c0, r) = (line.col as i64, line.row as i64);
    let sites: Vec<usize> = (0..line.len).map(|i| lattice.site_index(c0 + i as i64, r)).collect();
    for c in checks.checks() {
        if c.kind == CheckKind::Measured && sites.iter().any(|&s| c.op.site(s) != (0, 0)) {
            return Err(Error::InvalidDefect(format!("site already measured by {}", c.label)));
        }
    }
    let measured: Vec<WeylOp> = sites.iter().map(|&s| pf_observable(lattice, kind, s)).collect::<Result<_>>()?;
    let top: Vec<String> = (0..=line.len).map(|j| lattice.plaquette_at(c0 - 1 + j as i64, r - 1).label()).collect();
    let bottom: Vec<String> = (0..=line.len).map(|j| lattice.plaquette_at(c0 - 1 + j as i64, r).label()).collect();
    for l in top.iter().chain(&bottom) {
        if checks.get(l)?.kind != CheckKind::Plaquette {
            return Err(Error::InvalidDefect(format!("{l} is already part of a defect")));
        }
    }
    let op_of = |l: &String| checks.get(l).map(|c| c.op.clone());
    let mut fused: Vec<Check> = Vec::new();
    for j in 0..=line.len {
        let label = match j {
            0 => format!("{name}.E0"),
            j if j == line.len => format!("{name}.E1"),
            j => format!("{name}.C{j}"),
        };
        let (t, b) = (op_of(&top[j])?, op_of(&bottom[j])?);
        let f = fuse(&[&t, &b], &measured, d)?;
        fused.push(Check::new(label, CheckKind::Fused, f));
    }
    let row_ops: Vec<WeylOp> = top.iter().map(op_of).collect::<Result<_>>()?;
    let f = fuse(&row_ops.iter().collect::<Vec<_>>(), &measured, d)?;
    fused.push(Check::new(format!("{name}.N"), CheckKind::Nonlocal, f));

    let mut powers = Vec::new();
    for c in &mut fused {
        let (op, t) = strip(&c.op, &sites, &measured, d)?;
        c.op = op;
        powers.push(t);
    }
    for l in top.iter().chain(&bottom) {
        checks.remove(l)?;
    }
    for c in &fused {
        checks.push(c.clone())?;
    }
    let ys: Vec<Check> =
        measured.iter().enumerate().map(|(i, y)| Check::new(format!("{name}.Y{i}"), CheckKind::Measured, y.clone())).collect();
    for y in &ys {
        checks.push(y.clone())?;
    }
    checks.validate_commuting()?;

    // Feed-forward: outcome m_i leaves ω^{−t_{c,i} m_i} on fused check c, which the
    // conditional K_i^{m_i} cancels when sp(K_i, c) = t_{c,i}.
    let mut candidates: Vec<usize> = fused.iter().flat_map(|c| c.op.support()).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let n = lattice.n_qudits();
    let mut corrections = Vec::with_capacity(sites.len());
    for i in 0..sites.len() {
        let others: Vec<&Check> = checks
            .checks()
            .iter()
            .filter(|c| !fused.iter().any(|f| f.label == c.label))
            .filter(|c| candidates.iter().any(|&s| c.op.site(s) != (0, 0)))
            .collect();
        let mut found = None;
        for keep_observables in [true, false] {
            let mut rows: Vec<(&WeylOp, u8)> = fused.iter().zip(&powers).map(|(c, t)| (&c.op, t[i])).collect();
            rows.extend(
                others.iter().filter(|c| keep_observables || c.kind != CheckKind::Measured).map(|c| (&c.op, 0u8)),
            );
            found = solve_on_sites(d, n, &candidates, &rows);
            if found.is_some() {
                break;
            }
        }
        corrections.push(found.ok_or_else(|| Error::InvalidDefect("no feed-forward correction exists".into()))?);
    }
    for (y, k) in measured.iter().zip(&corrections) {
        let creg = circuit.measure(y.clone())?;
        let branches = (0..d as i64).map(|s| weyl_to_gates(&k.pow(s))).collect();
        circuit.cond(creg, branches)?;
    }

    let endpoint_labels = vec![format!("{name}.E0"), format!("{name}.E1")];
    let nonlocal_labels = vec![format!("{name}.N")];
    Ok(DefectSpec {
        kind,
        name: name.to_string(),
        sites,
        sigma: Vec::new(),
        endpoint_stabilizers: endpoint_labels.iter().map(|l| checks.get(l).map(|c| c.op.clone())).collect::<Result<_>>()?,
        nonlocal_stabilizers: nonlocal_labels.iter().map(|l| checks.get(l).map(|c| c.op.clone())).collect::<Result<_>>()?,
        endpoint_labels,
        nonlocal_labels,
        gates: Vec::new(),
    })
}

/// Ribbon sites (s_i, σ_i) and the CC unitary
/// U = KW† · ∏_i (CX_{s_i→σ_i} · C_{σ_i}) · KW with KW = ∏ CX_{s_i→s_{i+1}}.
///
/// The partner σ_i lies on the left of the plaquette between s_i and s_{i+1}, so every
/// controlled shift has exponent +1.
pub fn cc_ribbon(lattice: &TorusLattice, ribbon: Ribbon) -> Result<(Vec<usize>, Vec<usize>, Vec<CliffordGate>)> {
    let Ribbon { x0, y0, len } = ribbon;
    if len == 0 {
        return Err(Error::InvalidDefect("ribbon needs at least one site".into()));
    }
    if lattice.plaquette_at(x0, y0 - 1).kind != PlaquetteType::A {
        return Err(Error::InvalidDefect(format!("ribbon at ({x0},{y0}) must start next to an A plaquette")));
    }
    let s: Vec<usize> = (0..len as i64).map(|i| lattice.site_index(x0 + i, y0 - i)).collect();
    let sigma: Vec<usize> = (0..len as i64).map(|i| lattice.site_index(x0 + i, y0 - i - 1)).collect();
    let mut all: Vec<usize> = s.iter().chain(&sigma).copied().collect();
    all.sort_unstable();
    all.dedup();
    if all.len() != 2 * len {
        return Err(Error::InvalidDefect("ribbon wraps onto itself".into()));
    }
    let mut gates = Vec::new();
    for w in s.windows(2) {
        gates.push(CliffordGate::two(GateKind::CX, w[0], w[1]));
    }
    for (&a, &b) in s.iter().zip(&sigma) {
        gates.push(CliffordGate::one(GateKind::Conj, b));
        gates.push(CliffordGate::two(GateKind::CX, a, b));
    }
    for w in s.windows(2).rev() {
        gates.push(CliffordGate::two(GateKind::CXdag, w[0], w[1]));
    }
    Ok((s, sigma, gates))
}

/// Creates a CC pair along `ribbon`. The A plaquette below-left of the first site and the
/// B plaquette above-right of the last partner become nonlocal endpoint checks.
pub fn cc_defect(
    lattice: &TorusLattice,
    checks: &mut CheckSet,
    circuit: &mut Circuit,
    ribbon: Ribbon,
    name: &str,
) -> Result<DefectSpec> {
    let (s, sigma, gates) = cc_ribbon(lattice, ribbon)?;
    let start = lattice.plaquette_at(ribbon.x0 - 1, ribbon.y0).label();
    let end = lattice.plaquette_at(ribbon.x0 + ribbon.len as i64 - 1, ribbon.y0 - ribbon.len as i64 - 1).label();
    for l in [&start, &end] {
        if checks.get(l)?.kind != CheckKind::Plaquette {
            return Err(Error::InvalidDefect(format!("endpoint {l} is already part of a defect")));
        }
    }
    checks.conjugate(&gates, LOCAL_WEIGHT)?;
    for l in [&start, &end] {
        checks.set_kind(l, CheckKind::Nonlocal)?;
    }
    for g in &gates {
        circuit.push_gate(*g)?;
    }
    let endpoint_labels = vec![start, end];
    Ok(DefectSpec {
        kind: DefectKind::Cc,
        name: name.to_string(),
        sites: s,
        sigma,
        endpoint_stabilizers: endpoint_labels.iter().map(|l| checks.get(l).map(|c| c.op.clone())).collect::<Result<_>>()?,
        nonlocal_stabilizers: Vec::new(),
        endpoint_labels,
        nonlocal_labels: Vec::new(),
        gates,
    })
}

/// Re-applies the CC unitary, which moves one end onto the other and fuses the pair.
pub fn fuse_cc_pair(lattice: &TorusLattice, spec: &DefectSpec) -> Result<Circuit> {
    if spec.kind != DefectKind::Cc {
        return Err(Error::InvalidDefect(format!("{} is a {} defect, not CC", spec.name, spec.kind.name())));
    }
    let mut c = Circuit::new(lattice.d(), lattice.n_qudits())?;
    for g in &spec.gates {
        c.push_gate(*g)?;
    }
    Ok(c)
}

/// Reads |e^a, m^b⟩ of a CC pair from its two endpoint checks; `None` when not sharp.
pub fn cc_internal_state(checks: &CheckSet, spec: &DefectSpec, t: &StabilizerTableau) -> Result<Option<DefectInternalState>> {
    if spec.kind != DefectKind::Cc {
        return Err(Error::InvalidDefect(format!("{} is not a CC defect", spec.name)));
    }
    let value = |l: &str| -> Result<Option<u8>> { Ok(t.expectation_weyl(&checks.get(l)?.op)?.root()) };
    Ok(match (value(&spec.endpoint_labels[0])?, value(&spec.endpoint_labels[1])?) {
        (Some(a), Some(b)) => Some(DefectInternalState { e_charge: a, m_charge: b }),
        _ => None,
    })
}
