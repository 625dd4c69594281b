use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::defects::{DefectKind, Ribbon};
use super::experiments::Experiment;
use super::lattice::TorusLattice;
use crate::circuit::{run_shot_with, shot_seed, Circuit, NoiseChannel};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::weyl::{GateKind, WeylOp};

/// Geometry of a topological qutrit: two CC pairs and the charge loop threading them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritLayout {
    pub name: String,
    pub lx: usize,
    pub ly: usize,
    pub pairs: [Ribbon; 2],
    /// Site whose Z creates the charge pair.
    pub injection: (i64, i64),
    /// Check hosting the charge that travels around the loop.
    pub mobile: String,
    /// Sites the charge is dragged across before it fuses with its partner.
    pub path: Vec<(i64, i64)>,
    /// Plain A plaquettes that join the two A endpoints into one flux loop.
    pub bridge: Vec<String>,
}

impl QutritLayout {
    pub fn six_by_four() -> Self {
        QutritLayout {
            name: "6x4".into(),
            lx: 6,
            ly: 4,
            pairs: [Ribbon { x0: 1, y0: 2, len: 2 }, Ribbon { x0: 3, y0: 2, len: 2 }],
            injection: (5, 1),
            mobile: "A(4,0)".into(),
            path: vec![(4, 1), (3, 1), (2, 1), (1, 1), (0, 1)],
            bridge: vec!["A(1,3)".into()],
        }
    }

    pub fn six_by_two() -> Self {
        QutritLayout {
            name: "6x2".into(),
            lx: 6,
            ly: 2,
            pairs: [Ribbon { x0: 1, y0: 0, len: 1 }, Ribbon { x0: 3, y0: 0, len: 1 }],
            injection: (5, 1),
            mobile: "A(4,0)".into(),
            path: vec![(4, 1), (3, 1), (2, 1), (1, 1), (1, 0), (2, 0), (3, 0), (4, 0), (5, 1)],
            bridge: vec!["A(1,1)".into()],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "6x4" => Ok(Self::six_by_four()),
            "6x2" => Ok(Self::six_by_two()),
            _ => Err(Error::InvalidArgument(format!("unknown qutrit layout {name}; expected 6x4 or 6x2"))),
        }
    }
}

/// Projector values of the qutrit observables for one ancilla outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QutritSector {
    pub outcome: u8,
    pub shots: usize,
    /// (Π¹, Π^ω, Π^ω̄) of the charge loop.
    pub charge_loop: [f64; 3],
    /// (Π¹, Π^ω, Π^ω̄) of the flux loop around both A endpoints.
    pub flux_loop: [f64; 3],
    /// Π¹ of each pair's A endpoint.
    pub endpoints: [f64; 2],
    /// Π¹ of the product of both A endpoints.
    pub joint: f64,
    /// Π¹ of each pair's B endpoint.
    pub nonlocal: [f64; 2],
}

/// Protocol entangling two CC pairs through an ancilla-controlled charge loop.
#[derive(Clone, Debug)]
pub struct TopologicalQutrit {
    pub layout: QutritLayout,
    /// Ground state plus both CC pairs, on a lattice with one ancilla.
    pub experiment: Experiment,
    /// Full protocol ending in the ancilla measurement.
    pub circuit: Circuit,
    pub ancilla: usize,
    pub creg: usize,
    pub charge_loop: WeylOp,
    pub flux_loop: WeylOp,
    pub a_endpoints: [String; 2],
    pub b_endpoints: [String; 2],
    a_ops: [WeylOp; 2],
    b_ops: [WeylOp; 2],
    /// Instruction count before the ancilla measurement.
    unitary_len: usize,
}

impl TopologicalQutrit {
    pub fn build(layout: QutritLayout) -> Result<Self> {
        match Self::build_with(layout.clone(), false)? {
            Some(q) => Ok(q),
            None => Self::build_with(layout, true)?.ok_or_else(|| Error::Invariant("helper qutrit not used".into())),
        }
    }

    /// Returns `None` when the loop needs a quadratic ancilla phase but no helper was allocated.
    fn build_with(layout: QutritLayout, helper: bool) -> Result<Option<Self>> {
        let lattice = TorusLattice::new(layout.lx, layout.ly)?.with_ancillas(1 + helper as usize);
        let (d, n) = (lattice.d(), lattice.n_qudits());
        let ancilla = lattice.ancilla(0)?;
        let mut exp = Experiment::new(lattice.clone())?;
        exp.prepare()?;
        for (i, r) in layout.pairs.iter().enumerate() {
            exp.cc_defect(&format!("D{}", i + 1), *r)?;
        }
        let endpoint = |exp: &Experiment, i: usize, j: usize| -> Result<String> {
            let spec = exp.defect(&format!("D{}", i + 1))?;
            debug_assert_eq!(spec.kind, DefectKind::Cc);
            Ok(spec.endpoint_labels[j].clone())
        };
        let a_endpoints = [endpoint(&exp, 0, 0)?, endpoint(&exp, 1, 0)?];
        let b_endpoints = [endpoint(&exp, 0, 1)?, endpoint(&exp, 1, 1)?];
        let op = |exp: &Experiment, l: &str| -> Result<WeylOp> { Ok(exp.checks.get(l)?.op.clone()) };
        let a_ops = [op(&exp, &a_endpoints[0])?, op(&exp, &a_endpoints[1])?];
        let b_ops = [op(&exp, &b_endpoints[0])?, op(&exp, &b_endpoints[1])?];
        let mut flux_loop = a_ops[0].compose(&a_ops[1])?;
        for l in &layout.bridge {
            flux_loop = flux_loop.compose(&op(&exp, l)?)?;
        }

        // dry run of the uncontrolled loop to find the per-site operators
        let (ix, iy) = layout.injection;
        let injection = WeylOp::z_on(d, n, lattice.site_index(ix, iy))?;
        let mut dry = exp.clone();
        dry.apply(&injection)?;
        let mut steps = vec![injection];
        let mut host = layout.mobile.clone();
        for &site in &layout.path {
            let (next, op) = dry.drag(&host, &[site])?;
            steps.push(op);
            host = next;
        }
        if let Some(k) = dry.value(&host)?.filter(|&k| k != 0) {
            return Err(Error::InvalidPath(format!("loop leaves value {k} on {host}")));
        }
        let mut charge_loop = WeylOp::identity(d, n)?;
        for s in &steps {
            charge_loop = charge_loop.compose(s)?;
        }
        for (l, a) in a_endpoints.iter().zip(&a_ops) {
            if charge_loop.commutes_with(a)? {
                return Err(Error::InvalidPath(format!("loop does not thread endpoint {l}")));
            }
        }

        let mut circuit = exp.circuit.clone();
        circuit.gate1(GateKind::Fourier, ancilla)?;
        let (mut linear, mut quadratic) = (0u8, 0u8);
        for s in &steps {
            let (a, b) = push_controlled(&mut circuit, ancilla, s)?;
            linear = (linear + a) % 3;
            quadratic = (quadratic + b) % 3;
        }
        for _ in 0..linear {
            circuit.gate1(GateKind::ClockZ, ancilla)?;
        }
        if quadratic != 0 {
            if !helper {
                return Ok(None);
            }
            // ω^{q·a²} via a temporary copy of the ancilla
            let h = lattice.ancilla(1)?;
            circuit.gate2(GateKind::CX, ancilla, h)?;
            for _ in 0..quadratic {
                circuit.gate2(GateKind::CZ, ancilla, h)?;
            }
            circuit.gate2(GateKind::CXdag, ancilla, h)?;
        } else if helper {
            return Err(Error::Invariant("helper qutrit allocated but not needed".into()));
        }
        circuit.gate1(GateKind::FourierDag, ancilla)?;
        let unitary_len = circuit.len();
        let creg = circuit.measure(WeylOp::z_on(d, n, ancilla)?)?;
        Ok(Some(TopologicalQutrit {
            layout,
            experiment: exp,
            circuit,
            ancilla,
            creg,
            charge_loop,
            flux_loop,
            a_endpoints,
            b_endpoints,
            a_ops,
            b_ops,
            unitary_len,
        }))
    }

    /// Flux braid around the first pair only, oriented so sector j goes to j + 1.
    pub fn logical_x(&self) -> WeylOp {
        self.a_ops[0].inverse()
    }

    /// Named observables in the order used by [`QutritSector`].
    pub fn observables(&self) -> Result<Vec<(String, WeylOp)>> {
        let [a1, a2] = &self.a_endpoints;
        Ok(vec![
            ("charge_loop".into(), self.charge_loop.clone()),
            ("flux_loop".into(), self.flux_loop.clone()),
            (a1.clone(), self.a_ops[0].clone()),
            (a2.clone(), self.a_ops[1].clone()),
            (format!("{a1}*{a2}"), self.a_ops[0].compose(&self.a_ops[1])?),
            (self.b_endpoints[0].clone(), self.b_ops[0].clone()),
            (self.b_endpoints[1].clone(), self.b_ops[1].clone()),
        ])
    }

    /// Noiseless state before the ancilla measurement.
    pub fn pre_measurement_state(&self) -> Result<StabilizerTableau> {
        let mut t = StabilizerTableau::new_computational(self.circuit.d(), self.circuit.n_qudits())?;
        for g in self.circuit.gates().take(self.unitary_len) {
            t.apply_gate(g)?;
        }
        Ok(t)
    }

    /// Noiseless state after the ancilla reads `outcome`.
    pub fn outcome_state(&self, outcome: u8) -> Result<StabilizerTableau> {
        if !self.circuit.instructions()[..self.unitary_len].iter().all(|i| matches!(i, crate::circuit::Instruction::Gate(_))) {
            return Err(Error::Invariant("protocol prefix is not unitary".into()));
        }
        let mut t = self.pre_measurement_state()?;
        let z = WeylOp::z_on(t.d(), t.n(), self.ancilla)?;
        t.measure_weyl_forced(&z, outcome)?;
        Ok(t)
    }

    pub fn sector_of(&self, t: &StabilizerTableau, outcome: u8) -> Result<QutritSector> {
        let tri = |w: &WeylOp| -> Result<[f64; 3]> {
            let v = t.projector_family(w)?;
            Ok([v[0], v[1], v[2]])
        };
        let pi1 = |w: &WeylOp| t.projector_expectation(w, 0);
        Ok(QutritSector {
            outcome,
            shots: 1,
            charge_loop: tri(&self.charge_loop)?,
            flux_loop: tri(&self.flux_loop)?,
            endpoints: [pi1(&self.a_ops[0])?, pi1(&self.a_ops[1])?],
            joint: pi1(&self.a_ops[0].compose(&self.a_ops[1])?)?,
            nonlocal: [pi1(&self.b_ops[0])?, pi1(&self.b_ops[1])?],
        })
    }

    /// Exact values for each ancilla outcome.
    pub fn ideal(&self) -> Result<Vec<QutritSector>> {
        (0..3u8).map(|j| self.sector_of(&self.outcome_state(j)?, j)).collect()
    }

    /// Per-outcome averages over noisy shots; heralded shots are dropped.
    pub fn sample(
        &self,
        two: Option<&NoiseChannel>,
        one: Option<&NoiseChannel>,
        shots: usize,
        base_seed: u64,
    ) -> Result<Vec<QutritSector>> {
        let noisy = self.circuit.with_gate_noise(two, one)?;
        let empty = || -> Vec<Option<QutritSector>> { vec![None, None, None] };
        let acc = (0..shots)
            .into_par_iter()
            .try_fold(empty, |mut acc, i| {
                let (rec, t) = run_shot_with(&noisy, shot_seed(base_seed, i as u64), None)?;
                if !rec.herald_discard {
                    let j = rec.creg_values[self.creg];
                    let s = self.sector_of(&t, j)?;
                    merge(&mut acc[j as usize], s);
                }
                Ok::<_, Error>(acc)
            })
            .try_reduce(empty, |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    if let Some(y) = y {
                        merge(x, y);
                    }
                }
                Ok(a)
            })?;
        Ok(acc
            .into_iter()
            .enumerate()
            .map(|(j, s)| match s {
                Some(s) => normalise(s),
                None => QutritSector {
                    outcome: j as u8,
                    shots: 0,
                    charge_loop: [f64::NAN; 3],
                    flux_loop: [f64::NAN; 3],
                    endpoints: [f64::NAN; 2],
                    joint: f64::NAN,
                    nonlocal: [f64::NAN; 2],
                },
            })
            .collect())
    }
}

/// Appends the controlled shift and clock parts of a Weyl operator U. Branch a then
/// carries X^{ax} Z^{az}, which differs from U^a by ω^{αa + βa²}; returns (α, β).
fn push_controlled(c: &mut Circuit, ancilla: usize, w: &WeylOp) -> Result<(u8, u8)> {
    if w.d() != 3 {
        return Err(Error::InvalidArgument("controlled loops are implemented for d = 3".into()));
    }
    for s in w.support() {
        let (x, z) = w.site(s);
        for _ in 0..z {
            c.gate2(GateKind::CZ, ancilla, s)?;
        }
        for _ in 0..x {
            c.gate2(GateKind::CX, ancilla, s)?;
        }
    }
    let (p1, p2) = (w.pow(1).phase(), w.pow(2).phase());
    Ok(((p2 + 3 - p1) % 3, (2 * p1 + 3 - p2) % 3))
}

/// Sums are kept unnormalised until [`normalise`].
fn merge(slot: &mut Option<QutritSector>, s: QutritSector) {
    match slot {
        None => *slot = Some(s),
        Some(a) => {
            a.shots += s.shots;
            for k in 0..3 {
                a.charge_loop[k] += s.charge_loop[k];
                a.flux_loop[k] += s.flux_loop[k];
            }
            for k in 0..2 {
                a.endpoints[k] += s.endpoints[k];
                a.nonlocal[k] += s.nonlocal[k];
            }
            a.joint += s.joint;
        }
    }
}

fn normalise(mut s: QutritSector) -> QutritSector {
    let n = s.shots as f64;
    s.charge_loop.iter_mut().chain(s.flux_loop.iter_mut()).chain(s.endpoints.iter_mut()).chain(s.nonlocal.iter_mut()).for_each(|v| *v /= n);
    s.joint /= n;
    s
}
