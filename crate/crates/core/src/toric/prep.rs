use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::lattice::{Plaquette, PlaquetteType, TorusLattice};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::weyl::{CliffordGate, GateKind};

/// One explicitly prepared A plaquette and the corner that seeds it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepStep {
    pub plaquette: usize,
    pub representative: usize,
}

/// Explicit A-plaquette order; the remaining A plaquette is prepared implicitly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepOrdering {
    pub steps: Vec<PrepStep>,
    pub implicit: usize,
}

impl PrepOrdering {
    /// Default order: a breadth-first tree over corner-sharing A plaquettes rooted at the
    /// bottom-right A plaquette, prepared leaves first. Ties are broken row by row in a
    /// serpentine sweep. Each plaquette is seeded from the corner it shares with its parent.
    pub fn default_for(lattice: &TorusLattice) -> Result<Self> {
        let a: Vec<&Plaquette> = lattice.plaquettes_of(PlaquetteType::A).collect();
        let root = *a
            .iter()
            .max_by_key(|p| (p.corner.1, p.corner.0))
            .ok_or_else(|| Error::InvalidLattice("no A plaquettes".into()))?;
        let n = lattice.plaquettes().len();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[root.index] = 0;
        let mut queue = VecDeque::from([root.index]);
        while let Some(p) = queue.pop_front() {
            let (x, y) = lattice.plaquettes()[p].corner;
            for (dx, dy) in [(1i64, 1i64), (-1, 1), (1, -1), (-1, -1)] {
                let q = lattice.plaquette_at(x as i64 + dx, y as i64 + dy).index;
                if dist[q] == usize::MAX {
                    dist[q] = dist[p] + 1;
                    parent[q] = p;
                    queue.push_back(q);
                }
            }
        }
        let serpentine = |p: &Plaquette| {
            let (x, y) = p.corner;
            let col = if y % 2 == 0 { x } else { lattice.lx() - 1 - x };
            (y, col)
        };
        let mut order: Vec<&Plaquette> = a.iter().copied().filter(|p| p.index != root.index).collect();
        order.sort_by_key(|p| (std::cmp::Reverse(dist[p.index]), serpentine(p)));
        let steps = order
            .into_iter()
            .map(|p| {
                let par = &lattice.plaquettes()[parent[p.index]];
                let representative = *p
                    .sites
                    .iter()
                    .filter(|s| par.contains(**s))
                    .min()
                    .expect("tree neighbours share a corner");
                PrepStep { plaquette: p.index, representative }
            })
            .collect();
        Ok(PrepOrdering { steps, implicit: root.index })
    }

    /// Checks coverage and that each representative is untouched before its H.
    pub fn validate(&self, lattice: &TorusLattice) -> Result<()> {
        let mut seen = vec![false; lattice.plaquettes().len()];
        for s in &self.steps {
            let p = lattice
                .plaquettes()
                .get(s.plaquette)
                .ok_or_else(|| Error::InvalidOrdering(format!("plaquette {} out of range", s.plaquette)))?;
            if p.kind != PlaquetteType::A {
                return Err(Error::InvalidOrdering(format!("{} is not an A plaquette", p.label())));
            }
            if std::mem::replace(&mut seen[s.plaquette], true) {
                return Err(Error::InvalidOrdering(format!("{} listed twice", p.label())));
            }
            if !p.contains(s.representative) {
                return Err(Error::InvalidOrdering(format!("representative not a corner of {}", p.label())));
            }
        }
        let imp = lattice
            .plaquettes()
            .get(self.implicit)
            .filter(|p| p.kind == PlaquetteType::A)
            .ok_or_else(|| Error::InvalidOrdering("implicit plaquette must be an A plaquette".into()))?;
        if seen[imp.index] {
            return Err(Error::InvalidOrdering("implicit plaquette also listed explicitly".into()));
        }
        let missing = lattice.plaquettes_of(PlaquetteType::A).filter(|p| p.index != imp.index && !seen[p.index]).count();
        if missing > 0 {
            return Err(Error::InvalidOrdering(format!("{missing} A plaquettes not covered")));
        }
        let mut touched = vec![false; lattice.n_sites()];
        for s in &self.steps {
            if touched[s.representative] {
                return Err(Error::InvalidOrdering(format!(
                    "representative {} of {} touched earlier",
                    s.representative,
                    lattice.plaquettes()[s.plaquette].label()
                )));
            }
            for &q in &lattice.plaquettes()[s.plaquette].sites {
                touched[q] = true;
            }
        }
        Ok(())
    }
}

/// Gates preparing one A plaquette: H on the representative, then CX or CX† to each
/// other corner so that the representative's X spreads into the plaquette pattern.
pub fn plaquette_gates(lattice: &TorusLattice, step: &PrepStep) -> Vec<CliffordGate> {
    let p = &lattice.plaquettes()[step.plaquette];
    let r = step.representative;
    let er = p.exponent_at(r).expect("representative is a corner").0;
    let mut gates = vec![CliffordGate::one(GateKind::Fourier, r)];
    for (&t, &(et, _)) in p.sites.iter().zip(&p.pattern) {
        if t != r {
            let kind = if er * et > 0 { GateKind::CX } else { GateKind::CXdag };
            gates.push(CliffordGate::two(kind, r, t));
        }
    }
    gates
}

/// Unitary ground-state preparation of |00⟩_L from |0…0⟩.
pub fn ground_state_circuit(lattice: &TorusLattice, ordering: &PrepOrdering) -> Result<Circuit> {
    ordering.validate(lattice)?;
    let mut c = Circuit::new(lattice.d(), lattice.n_qudits())?;
    for s in &ordering.steps {
        for g in plaquette_gates(lattice, s) {
            c.push_gate(g)?;
        }
    }
    Ok(c)
}

/// Ground-state circuit with the default ordering.
pub fn default_ground_state(lattice: &TorusLattice) -> Result<Circuit> {
    ground_state_circuit(lattice, &PrepOrdering::default_for(lattice)?)
}
