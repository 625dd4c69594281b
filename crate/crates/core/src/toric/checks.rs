use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{PlaquetteType, TorusLattice};
use crate::error::{Error, Result};
use crate::tableau::{projector_value, Expectation, StabilizerTableau};
use crate::weyl::{conjugate_by_gates, CliffordGate, WeylOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Plaquette,
    /// Local product of plaquettes fused by a defect measurement.
    Fused,
    /// Defect stabilizer spanning both endpoints of a line.
    Nonlocal,
    /// The measured single-site observable of a defect line.
    Measured,
    /// Plaquette image under a defect unitary that is no longer a plaquette.
    Transformed,
}

/// Plaquettes, fused defect checks and locally transformed plaquettes host anyons.
pub fn is_local_kind(kind: CheckKind) -> bool {
    matches!(kind, CheckKind::Plaquette | CheckKind::Fused | CheckKind::Transformed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    E,
    Ebar,
    M,
    Mbar,
}

impl Species {
    pub const ALL: [Species; 4] = [Species::E, Species::Ebar, Species::M, Species::Mbar];

    /// Species signalled by eigenvalue ω^k (k = 1 or d−1) on a check of the given sector.
    pub fn from_value(sector: PlaquetteType, k: u8, d: u32) -> Option<Species> {
        let k = k as u32 % d;
        match (sector, k) {
            (_, 0) => None,
            (PlaquetteType::A, 1) => Some(Species::E),
            (PlaquetteType::A, k) if k == d - 1 => Some(Species::Ebar),
            (PlaquetteType::B, 1) => Some(Species::M),
            (PlaquetteType::B, k) if k == d - 1 => Some(Species::Mbar),
            _ => None,
        }
    }

    pub fn sector(self) -> PlaquetteType {
        match self {
            Species::E | Species::Ebar => PlaquetteType::A,
            Species::M | Species::Mbar => PlaquetteType::B,
        }
    }

    /// Eigenvalue exponent carried by this species on its own sector.
    pub fn exponent(self, d: u32) -> u8 {
        match self {
            Species::E | Species::M => 1,
            Species::Ebar | Species::Mbar => (d - 1) as u8,
        }
    }

    pub fn conjugate(self) -> Species {
        match self {
            Species::E => Species::Ebar,
            Species::Ebar => Species::E,
            Species::M => Species::Mbar,
            Species::Mbar => Species::M,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::E => "e",
            Species::Ebar => "ebar",
            Species::M => "m",
            Species::Mbar => "mbar",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub op: WeylOp,
    /// Original plaquette operator, kept so a check can revert once a defect is removed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<WeylOp>,
}

impl Check {
    /// A for shift-type operators, B for clock-type, none for mixed ones.
    pub fn sector(&self) -> Option<PlaquetteType> {
        if self.op.is_x_type() {
            Some(PlaquetteType::A)
        } else if self.op.is_z_type() {
            Some(PlaquetteType::B)
        } else {
            None
        }
    }

    pub fn new(label: impl Into<String>, kind: CheckKind, op: WeylOp) -> Self {
        Check { label: label.into(), kind, op, origin: None }
    }

    /// Whether an eigenvalue ≠ 1 on this check counts as a local excitation.
    pub fn is_local(&self) -> bool {
        is_local_kind(self.kind)
    }
}

/// Ordered list of tracked stabilizer checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSet {
    checks: Vec<Check>,
}

impl CheckSet {
    pub fn plaquettes(lattice: &TorusLattice) -> Self {
        let checks = lattice
            .plaquettes()
            .iter()
            .map(|p| {
                let op = lattice.op(p);
                Check { label: p.label(), kind: CheckKind::Plaquette, origin: Some(op.clone()), op }
            })
            .collect();
        CheckSet { checks }
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.checks.iter().position(|c| c.label == label)
    }

    pub fn get(&self, label: &str) -> Result<&Check> {
        self.checks
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::InvalidPath(format!("unknown check {label}")))
    }

    pub fn push(&mut self, check: Check) -> Result<()> {
        if self.position(&check.label).is_some() {
            return Err(Error::InvalidDefect(format!("duplicate check label {}", check.label)));
        }
        self.checks.push(check);
        Ok(())
    }

    pub fn remove(&mut self, label: &str) -> Result<Check> {
        let i = self.position(label).ok_or_else(|| Error::InvalidPath(format!("unknown check {label}")))?;
        Ok(self.checks.remove(i))
    }

    pub fn checks_mut(&mut self) -> &mut [Check] {
        &mut self.checks
    }

    /// Heisenberg update through a unitary gate list.
    ///
    /// Checks mapped onto themselves (up to phase) keep their operator. A check whose image
    /// returns to its original plaquette reverts to `Plaquette`; any other changed plaquette image
    /// becomes `Transformed` while it stays within `local_weight` sites and `Nonlocal` otherwise.
    pub fn conjugate(&mut self, gates: &[CliffordGate], local_weight: usize) -> Result<()> {
        for c in &mut self.checks {
            let image = conjugate_by_gates(gates, &c.op)?;
            match &c.origin {
                Some(o) if image == *o && image != c.op => c.kind = CheckKind::Plaquette,
                Some(_) if !image.same_pauli(&c.op) => {
                    c.kind = if image.weight() <= local_weight { CheckKind::Transformed } else { CheckKind::Nonlocal }
                }
                _ => {}
            }
            if !image.same_pauli(&c.op) || c.origin.as_ref() == Some(&image) {
                c.op = image;
            }
        }
        Ok(())
    }

    /// Marks a check as nonlocal regardless of its weight.
    pub fn set_kind(&mut self, label: &str, kind: CheckKind) -> Result<()> {
        let i = self.position(label).ok_or_else(|| Error::InvalidPath(format!("unknown check {label}")))?;
        self.checks[i].kind = kind;
        Ok(())
    }

    /// Fails unless every pair of checks commutes.
    pub fn validate_commuting(&self) -> Result<()> {
        for (i, a) in self.checks.iter().enumerate() {
            for b in &self.checks[i + 1..] {
                if a.op.symplectic_product(&b.op)? != 0 {
                    return Err(Error::Invariant(format!("checks {} and {} do not commute", a.label, b.label)));
                }
            }
        }
        Ok(())
    }

    /// Exact per-check values on a pure stabilizer state.
    pub fn snapshot(&self, t: &StabilizerTableau) -> Result<Vec<PlaquetteSnapshot>> {
        self.checks.iter().map(|c| PlaquetteSnapshot::exact(c, t)).collect()
    }
}

/// Per-check expectation ⟨S⟩, projector triple (Π^{ω^a}) and arg in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaquetteSnapshot {
    pub label: String,
    pub kind: CheckKind,
    pub sector: Option<PlaquetteType>,
    pub expectation: [f64; 2],
    pub projectors: Vec<f64>,
    pub arg_deg: Option<f64>,
}

impl PlaquetteSnapshot {
    pub fn exact(c: &Check, t: &StabilizerTableau) -> Result<Self> {
        let d = t.d();
        let e = t.expectation_weyl(&c.op)?;
        let projectors = (0..d as u8).map(|a| projector_value(e, a, d)).collect();
        Ok(Self::from_parts(c, e.to_complex(d), projectors))
    }

    fn from_parts(c: &Check, z: Complex64, projectors: Vec<f64>) -> Self {
        let arg_deg = (z.norm() > 1e-9).then(|| z.arg().to_degrees().rem_euclid(360.0));
        PlaquetteSnapshot {
            label: c.label.clone(),
            kind: c.kind,
            sector: c.sector(),
            expectation: [z.re, z.im],
            projectors,
            arg_deg,
        }
    }

    pub fn expectation(&self) -> Complex64 {
        Complex64::new(self.expectation[0], self.expectation[1])
    }

    /// Π¹ estimate.
    pub fn pi1(&self) -> f64 {
        self.projectors[0]
    }

    /// Eigenvalue exponent when the check is sharp (some projector equals 1).
    pub fn sharp_value(&self) -> Option<u8> {
        self.projectors.iter().position(|&p| (p - 1.0).abs() < 1e-9).map(|k| k as u8)
    }

    /// Anyon species sitting on this check, for sharp local checks with a sector.
    pub fn species(&self, d: u32) -> Option<Species> {
        if !is_local_kind(self.kind) {
            return None;
        }
        Species::from_value(self.sector?, self.sharp_value()?, d)
    }
}

/// Snapshots of all checks after one tagged script step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub step: String,
    pub snapshots: Vec<PlaquetteSnapshot>,
}

impl Frame {
    pub fn get(&self, label: &str) -> Option<&PlaquetteSnapshot> {
        self.snapshots.iter().find(|s| s.label == label)
    }

    /// Local checks whose Π¹ is below 1/2, i.e. clearly excited in a noiseless frame.
    pub fn excited(&self) -> Vec<&PlaquetteSnapshot> {
        self.snapshots
            .iter()
            .filter(|s| is_local_kind(s.kind) && s.pi1() < 0.5)
            .collect()
    }

    /// (label, species) of every sharp excitation with a definite sector.
    pub fn anyons(&self, d: u32) -> Vec<(String, Species)> {
        self.snapshots.iter().filter_map(|s| s.species(d).map(|sp| (s.label.clone(), sp))).collect()
    }
}

/// Running average of snapshots over noisy trajectories.
#[derive(Clone, Debug)]
pub struct SnapshotAccumulator {
    template: Vec<Check>,
    sums: Vec<Complex64>,
    projector_sums: Vec<Vec<f64>>,
    count: usize,
    d: u32,
}

impl SnapshotAccumulator {
    pub fn new(checks: &CheckSet, d: u32) -> Self {
        SnapshotAccumulator {
            template: checks.checks.clone(),
            sums: vec![Complex64::new(0.0, 0.0); checks.len()],
            projector_sums: vec![vec![0.0; d as usize]; checks.len()],
            count: 0,
            d,
        }
    }

    pub fn add(&mut self, t: &StabilizerTableau) -> Result<()> {
        for (i, c) in self.template.iter().enumerate() {
            let e: Expectation = t.expectation_weyl(&c.op)?;
            self.sums[i] += e.to_complex(self.d);
            for a in 0..self.d as u8 {
                self.projector_sums[i][a as usize] += projector_value(e, a, self.d);
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &SnapshotAccumulator) {
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            for a in 0..self.d as usize {
                self.projector_sums[i][a] += other.projector_sums[i][a];
            }
        }
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Vec<PlaquetteSnapshot> {
        let n = self.count.max(1) as f64;
        self.template
            .iter()
            .enumerate()
            .map(|(i, c)| {
                PlaquetteSnapshot::from_parts(c, self.sums[i] / n, self.projector_sums[i].iter().map(|v| v / n).collect())
            })
            .collect()
    }
}
