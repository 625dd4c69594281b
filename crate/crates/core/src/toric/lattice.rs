use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl::{check_dim, WeylOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaquetteType {
    A,
    B,
}

/// Corner order used by every plaquette: top-left, top-right, bottom-left, bottom-right.
pub const CORNERS: [&str; 4] = ["TL", "TR", "BL", "BR"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub index: usize,
    pub kind: PlaquetteType,
    /// Top-left corner (x, y); y grows downwards.
    pub corner: (usize, usize),
    pub sites: [usize; 4],
    /// Per-corner (x, z) exponents as signed integers.
    pub pattern: [(i64, i64); 4],
}

impl Plaquette {
    pub fn label(&self) -> String {
        let t = match self.kind {
            PlaquetteType::A => 'A',
            PlaquetteType::B => 'B',
        };
        format!("{t}({},{})", self.corner.0, self.corner.1)
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.contains(&site)
    }

    /// Exponent pattern at `site`, if it is a corner.
    pub fn exponent_at(&self, site: usize) -> Option<(i64, i64)> {
        self.sites.iter().position(|&s| s == site).map(|i| self.pattern[i])
    }
}

const A_PATTERN: [(i64, i64); 4] = [(1, 0), (1, 0), (-1, 0), (-1, 0)];
const B_PATTERN: [(i64, i64); 4] = [(0, -1), (0, 1), (0, -1), (0, 1)];

/// Rotated toric code on an Lx × Ly torus with one qudit per vertex.
///
/// Plaquettes are indexed by their top-left corner; the plaquette at (x, y)
/// is of type A when x + y is even. Ancilla qudits, if any, follow the
/// lattice sites in the qudit numbering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusLattice {
    lx: usize,
    ly: usize,
    d: u32,
    ancillas: usize,
    plaquettes: Vec<Plaquette>,
}

impl TorusLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        Self::with_dim(lx, ly, 3)
    }

    pub fn with_dim(lx: usize, ly: usize, d: u32) -> Result<Self> {
        check_dim(d)?;
        if lx < 2 || ly < 2 || lx % 2 != 0 || ly % 2 != 0 {
            return Err(Error::InvalidLattice(format!("{lx}x{ly}: both sides must be even and at least 2")));
        }
        let mut lat = TorusLattice { lx, ly, d, ancillas: 0, plaquettes: Vec::new() };
        for y in 0..ly {
            for x in 0..lx {
                let kind = if (x + y) % 2 == 0 { PlaquetteType::A } else { PlaquetteType::B };
                let sites = [
                    lat.site_index(x as i64, y as i64),
                    lat.site_index(x as i64 + 1, y as i64),
                    lat.site_index(x as i64, y as i64 + 1),
                    lat.site_index(x as i64 + 1, y as i64 + 1),
                ];
                let pattern = match kind {
                    PlaquetteType::A => A_PATTERN,
                    PlaquetteType::B => B_PATTERN,
                };
                lat.plaquettes.push(Plaquette { index: y * lx + x, kind, corner: (x, y), sites, pattern });
            }
        }
        lat.check_commutation()?;
        Ok(lat)
    }

    /// Same lattice with `k` extra qudits appended after the sites.
    pub fn with_ancillas(mut self, k: usize) -> Self {
        self.ancillas = k;
        self
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn n_qudits(&self) -> usize {
        self.n_sites() + self.ancillas
    }

    /// Index of the first ancilla qudit.
    pub fn ancilla(&self, i: usize) -> Result<usize> {
        if i >= self.ancillas {
            return Err(Error::TargetOutOfRange { index: i, n: self.ancillas });
        }
        Ok(self.n_sites() + i)
    }

    /// Wrapping site index of (x, y).
    pub fn site_index(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.lx as i64) as usize;
        let y = y.rem_euclid(self.ly as i64) as usize;
        y * self.lx + x
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn plaquettes_of(&self, kind: PlaquetteType) -> impl Iterator<Item = &Plaquette> {
        self.plaquettes.iter().filter(move |p| p.kind == kind)
    }

    /// Plaquette whose top-left corner is (x, y), wrapping.
    pub fn plaquette_at(&self, x: i64, y: i64) -> &Plaquette {
        &self.plaquettes[self.site_index(x, y)]
    }

    pub fn plaquette_by_label(&self, label: &str) -> Option<&Plaquette> {
        self.plaquettes.iter().find(|p| p.label() == label)
    }

    /// Plaquettes having `site` as a corner, in the order NW, NE, SW, SE around it.
    pub fn plaquettes_around(&self, site: usize) -> [&Plaquette; 4] {
        let (x, y) = self.coords(site);
        let (x, y) = (x as i64, y as i64);
        [
            self.plaquette_at(x - 1, y - 1),
            self.plaquette_at(x, y - 1),
            self.plaquette_at(x - 1, y),
            self.plaquette_at(x, y),
        ]
    }

    pub fn op(&self, p: &Plaquette) -> WeylOp {
        let mut w = WeylOp::identity(self.d, self.n_qudits()).expect("valid dimension");
        let d = self.d as i64;
        for (&s, &(a, b)) in p.sites.iter().zip(&p.pattern) {
            let (xa, zb) = w.site(s);
            w.set_site(s, (xa as i64 + a).rem_euclid(d) as u8, (zb as i64 + b).rem_euclid(d) as u8);
        }
        w
    }

    fn string(&self, sites: impl Iterator<Item = (usize, i64)>, x_type: bool) -> WeylOp {
        let mut w = WeylOp::identity(self.d, self.n_qudits()).expect("valid dimension");
        let d = self.d as i64;
        for (s, e) in sites {
            let e = e.rem_euclid(d) as u8;
            if x_type {
                w.set_site(s, e, 0);
            } else {
                w.set_site(s, 0, e);
            }
        }
        w
    }

    /// ∏_x Z^{(−1)^x} along row y.
    pub fn z_hori(&self, y: usize) -> WeylOp {
        self.string((0..self.lx).map(|x| (self.site_index(x as i64, y as i64), sign(x))), false)
    }

    /// ∏_y Z along column x.
    pub fn z_vert(&self, x: usize) -> WeylOp {
        self.string((0..self.ly).map(|y| (self.site_index(x as i64, y as i64), 1)), false)
    }

    /// ∏_x X along row y.
    pub fn x_hori(&self, y: usize) -> WeylOp {
        self.string((0..self.lx).map(|x| (self.site_index(x as i64, y as i64), 1)), true)
    }

    /// ∏_y X^{(−1)^y} along column x.
    pub fn x_vert(&self, x: usize) -> WeylOp {
        self.string((0..self.ly).map(|y| (self.site_index(x as i64, y as i64), sign(y))), true)
    }

    fn check_commutation(&self) -> Result<()> {
        let ops: Vec<WeylOp> = self.plaquettes.iter().map(|p| self.op(p)).collect();
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let pi = &self.plaquettes[i];
                let pj = &self.plaquettes[j];
                if !pi.sites.iter().any(|s| pj.contains(*s)) {
                    continue;
                }
                if ops[i].symplectic_product(&ops[j])? != 0 {
                    return Err(Error::Invariant(format!("{} and {} do not commute", pi.label(), pj.label())));
                }
            }
        }
        Ok(())
    }
}

fn sign(i: usize) -> i64 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for (lx, ly) in [(6, 4), (4, 4), (6, 2)] {
            let l = TorusLattice::new(lx, ly).unwrap();
            assert_eq!(l.n_sites(), lx * ly);
            assert_eq!(l.plaquettes_of(PlaquetteType::A).count(), lx * ly / 2);
            assert_eq!(l.plaquettes_of(PlaquetteType::B).count(), lx * ly / 2);
        }
        assert!(TorusLattice::new(5, 4).is_err());
        assert!(TorusLattice::new(4, 0).is_err());
    }

    #[test]
    fn product_of_a_plaquettes_is_identity() {
        for (lx, ly) in [(6, 4), (4, 4), (6, 2), (8, 8)] {
            let l = TorusLattice::new(lx, ly).unwrap();
            for kind in [PlaquetteType::A, PlaquetteType::B] {
                let mut acc = WeylOp::identity(3, l.n_qudits()).unwrap();
                for p in l.plaquettes_of(kind) {
                    acc = acc.compose(&l.op(p)).unwrap();
                }
                assert!(acc.is_scalar(), "{lx}x{ly} {kind:?}");
            }
        }
    }

    #[test]
    fn logicals_commute_with_plaquettes() {
        let l = TorusLattice::new(6, 4).unwrap();
        let logicals = [l.z_hori(1), l.z_vert(2), l.x_hori(3), l.x_vert(0)];
        for w in &logicals {
            for p in l.plaquettes() {
                assert_eq!(w.symplectic_product(&l.op(p)).unwrap(), 0, "{w} vs {}", p.label());
            }
        }
        // conjugate logical pairs fail to commute
        assert_ne!(l.z_hori(0).symplectic_product(&l.x_vert(0)).unwrap(), 0);
        assert_ne!(l.z_vert(0).symplectic_product(&l.x_hori(0)).unwrap(), 0);
    }

    #[test]
    fn higher_dimension_lattice_commutes() {
        assert!(TorusLattice::with_dim(4, 4, 5).is_ok());
    }
}
