use serde::{Deserialize, Serialize};

use super::checks::Species;
use super::defects::{DefectKind, PfLine, Ribbon};
use super::experiments::{Experiment, Script, Step};
use super::lattice::TorusLattice;
use crate::error::{Error, Result};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 4] = ["pf_braid", "cc_braid", "pf_pfstar_braid", "pf_conjugated"];

/// Executes steps while recording them, so drag hosts resolve as the script is built.
struct Builder {
    name: String,
    exp: Experiment,
    steps: Vec<Step>,
}

impl Builder {
    fn new(name: &str, lx: usize, ly: usize) -> Result<Self> {
        Ok(Builder { name: name.into(), exp: Experiment::new(TorusLattice::new(lx, ly)?)?, steps: Vec::new() })
    }

    fn push(&mut self, step: Step) -> Result<()> {
        self.exp.step(&step)?;
        self.steps.push(step);
        Ok(())
    }

    fn snap(&mut self, tag: &str) -> Result<()> {
        self.push(Step::Snapshot { tag: tag.into() })
    }

    /// One drag step and one snapshot per site; returns the final host.
    fn drag_each(&mut self, from: &str, path: &[(i64, i64)], tag: &str) -> Result<String> {
        let mut host = from.to_string();
        for (i, &site) in path.iter().enumerate() {
            let (next, _) = self.exp.drag(&host, &[site])?;
            self.steps.push(Step::Drag { from: host.clone(), path: vec![site] });
            host = next;
            self.snap(&format!("{tag}{}", i + 1))?;
        }
        Ok(host)
    }

    fn finish(self) -> Script {
        Script { name: self.name, lx: self.exp.lattice.lx(), ly: self.exp.lattice.ly(), steps: self.steps }
    }
}

fn apply(x: i64, y: i64, a: i64, b: i64) -> Step {
    Step::Apply { factors: vec![(x, y, a, b)] }
}

/// PF braid on 6×4: an e is dragged across a single-site PF line and leaves as m,
/// ending next to the ē as an ēm dyon.
pub fn pf_braid() -> Result<Script> {
    let mut b = Builder::new("pf_braid", 6, 4)?;
    b.push(Step::Prepare)?;
    b.snap("ground")?;
    b.push(Step::PfDefect { name: "P".into(), kind: DefectKind::Pf, line: PfLine { col: 3, row: 2, len: 1 } })?;
    b.snap("defect")?;
    b.push(apply(2, 1, 0, 1))?;
    b.snap("pair")?;
    b.drag_each("A(2,0)", &[(3, 1), (3, 3), (2, 0)], "move")?;
    Ok(b.finish())
}

/// CC braid on 4×4: an m̄ passes through a length-2 ribbon, returns as m̄ via the
/// conjugated branch, and the fused pair reveals the absorbed m.
pub fn cc_braid() -> Result<Script> {
    let mut b = Builder::new("cc_braid", 4, 4)?;
    b.push(Step::Prepare)?;
    b.snap("ground")?;
    b.push(Step::CcDefect { name: "D".into(), ribbon: Ribbon { x0: 1, y0: 2, len: 2 } })?;
    b.snap("defect")?;
    b.push(apply(0, 1, 1, 0))?;
    b.snap("pair")?;
    b.drag_each("B(0,1)", &[(1, 2), (1, 3), (0, 0)], "move")?;
    b.push(Step::CcFuse { name: "D".into() })?;
    b.snap("fused")?;
    Ok(b.finish())
}

/// The same braid as [`cc_braid`] through a PF line and a PF* line instead of a ribbon.
pub fn pf_pfstar_braid() -> Result<Script> {
    let mut b = Builder::new("pf_pfstar_braid", 4, 4)?;
    b.push(Step::Prepare)?;
    b.snap("ground")?;
    b.push(Step::PfDefect { name: "P".into(), kind: DefectKind::Pf, line: PfLine { col: 1, row: 1, len: 1 } })?;
    b.push(Step::PfDefect { name: "Q".into(), kind: DefectKind::PfStar, line: PfLine { col: 3, row: 3, len: 1 } })?;
    b.snap("defects")?;
    b.push(apply(0, 0, 1, 0))?;
    b.snap("pair")?;
    b.drag_each("B(0,3)", &[(1, 0), (2, 2), (3, 0)], "move")?;
    Ok(b.finish())
}

/// A PF line on 6×4 followed by a ribbon passing over it.
pub fn pf_conjugated() -> Result<Script> {
    let mut b = Builder::new("pf_conjugated", 6, 4)?;
    b.push(Step::Prepare)?;
    b.snap("ground")?;
    b.push(Step::PfDefect { name: "P".into(), kind: DefectKind::Pf, line: PfLine { col: 3, row: 2, len: 1 } })?;
    b.snap("pf")?;
    b.push(Step::CcDefect { name: "D".into(), ribbon: Ribbon { x0: 1, y0: 2, len: 2 } })?;
    b.snap("conjugated")?;
    Ok(b.finish())
}

pub fn preset(name: &str) -> Result<Script> {
    match name {
        "pf_braid" => pf_braid(),
        "cc_braid" => cc_braid(),
        "pf_pfstar_braid" => pf_pfstar_braid(),
        "pf_conjugated" => pf_conjugated(),
        _ => Err(Error::InvalidArgument(format!("unknown preset {name}; expected one of {}", PRESETS.join(", ")))),
    }
}

/// Line through which a test anyon is braided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BraidRoute {
    /// A PF line and a PF* line crossed in sequence.
    PfPair,
    /// A single CC ribbon.
    Cc,
}

/// Braid of one test species on 4×4. Both routes end with a single anyon of the
/// dragged species on the same plaquette.
pub fn species_braid(species: Species, route: BraidRoute) -> Result<Script> {
    let (create, mobile, pf_path, cc_path): ((i64, i64, i64, i64), &str, [(i64, i64); 3], [(i64, i64); 3]) =
        match species {
            Species::E => ((2, 0, 0, 1), "A(1,3)", [(1, 0), (0, 2), (3, 0)], [(1, 3), (0, 2), (3, 1)]),
            Species::Ebar => ((2, 0, 0, 1), "A(2,0)", [(3, 0), (0, 2), (1, 0)], [(3, 1), (0, 2), (1, 3)]),
            Species::M => ((0, 0, 1, 0), "B(3,0)", [(3, 0), (2, 2), (1, 0)], [(3, 1), (3, 2), (0, 3)]),
            Species::Mbar => ((0, 0, 1, 0), "B(0,3)", [(1, 0), (2, 2), (3, 0)], [(0, 3), (3, 3), (3, 0)]),
        };
    let mut b = Builder::new(&format!("{}_{}", species.name(), route_name(route)), 4, 4)?;
    b.push(Step::Prepare)?;
    let path = match route {
        BraidRoute::PfPair => {
            b.push(Step::PfDefect { name: "P".into(), kind: DefectKind::Pf, line: PfLine { col: 1, row: 1, len: 1 } })?;
            b.push(Step::PfDefect { name: "Q".into(), kind: DefectKind::PfStar, line: PfLine { col: 3, row: 3, len: 1 } })?;
            pf_path
        }
        BraidRoute::Cc => {
            b.push(Step::CcDefect { name: "D".into(), ribbon: Ribbon { x0: 0, y0: 3, len: 1 } })?;
            cc_path
        }
    };
    b.snap("defects")?;
    let (x, y, a, z) = create;
    b.push(apply(x, y, a, z))?;
    b.snap("pair")?;
    b.drag_each(mobile, &path, "move")?;
    Ok(b.finish())
}

fn route_name(route: BraidRoute) -> &'static str {
    match route {
        BraidRoute::PfPair => "pf_pfstar",
        BraidRoute::Cc => "cc",
    }
}
