use serde::{Deserialize, Serialize};

use super::checks::{Check, CheckKind, CheckSet, Species};
use super::lattice::{PlaquetteType, TorusLattice};
use crate::error::{Error, Result};
use crate::modular;
use crate::weyl::WeylOp;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnyonString {
    pub species: Species,
    pub path: Vec<usize>,
    pub operator: WeylOp,
}

/// String along a walk of sites whose last end carries `species`.
///
/// Consecutive sites must be corners of a common plaquette of the species' sector
/// (A for charges, B for fluxes); exponents alternate so that every crossed plaquette
/// stays unexcited. The first end carries the antiparticle.
pub fn anyon_string(lattice: &TorusLattice, species: Species, path: &[usize]) -> Result<AnyonString> {
    let n = lattice.n_sites();
    if path.is_empty() || path.iter().any(|&s| s >= n) {
        return Err(Error::InvalidPath("path must be a non-empty list of lattice sites".into()));
    }
    let mut dedup = path.to_vec();
    dedup.sort_unstable();
    dedup.dedup();
    if dedup.len() != path.len() {
        return Err(Error::InvalidPath("path revisits a site".into()));
    }
    let sector = species.sector();
    let d = lattice.d() as i64;
    // signed corner exponent of the sector's operator at a site
    let coeff = |p: usize, s: usize| -> i64 {
        let (a, b) = lattice.plaquettes()[p].exponent_at(s).expect("corner");
        match sector {
            PlaquetteType::A => -a,
            PlaquetteType::B => b,
        }
    };
    let mut crossed = Vec::new();
    let mut ks = vec![1i64];
    for w in path.windows(2) {
        let p = shared_plaquette(lattice, w[0], w[1], sector, &crossed).ok_or_else(|| {
            Error::InvalidPath(format!("sites {} and {} share no unused {sector:?} plaquette", w[0], w[1]))
        })?;
        crossed.push(p);
        let k = *ks.last().expect("non-empty");
        ks.push(-k * coeff(p, w[0]) * coeff(p, w[1]));
    }
    let last = *path.last().expect("non-empty");
    let end = lattice
        .plaquettes_around(last)
        .iter()
        .find(|p| p.kind == sector && !crossed.contains(&p.index))
        .map(|p| p.index)
        .ok_or_else(|| Error::InvalidPath("string end has no free plaquette".into()))?;
    let produced = (ks.last().expect("non-empty") * coeff(end, last)).rem_euclid(d) as u8;
    let scale = modular::mul(species.exponent(lattice.d()), modular::inv(produced, d as u8), d as u8) as i64;
    let mut w = WeylOp::identity(lattice.d(), lattice.n_qudits())?;
    for (&s, &k) in path.iter().zip(&ks) {
        let e = (k * scale).rem_euclid(d) as u8;
        match sector {
            PlaquetteType::A => w.set_site(s, 0, e),
            PlaquetteType::B => w.set_site(s, e, 0),
        }
    }
    Ok(AnyonString { species, path: path.to_vec(), operator: w })
}

fn shared_plaquette(lattice: &TorusLattice, s: usize, t: usize, sector: PlaquetteType, used: &[usize]) -> Option<usize> {
    lattice
        .plaquettes_around(s)
        .iter()
        .find(|p| p.kind == sector && p.contains(t) && !used.contains(&p.index))
        .map(|p| p.index)
}

/// Plaquette crossed by the diagonal step s → t, if they are diagonal neighbours.
pub fn diagonal_plaquette(lattice: &TorusLattice, s: usize, t: usize) -> Option<usize> {
    let (sx, sy) = lattice.coords(s);
    for (dx, dy) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        if lattice.site_index(sx as i64 + dx, sy as i64 + dy) == t {
            let px = sx as i64 + dx.min(0);
            let py = sy as i64 + dy.min(0);
            return Some(lattice.plaquette_at(px, py).index);
        }
    }
    None
}

/// Finds a Weyl operator supported on `sites` with sp(K, op_i) = t_i for every row.
///
/// Checks not listed must be passed explicitly with target 0 by the caller; the search
/// tries single sites first and grows the support, returning the first solution.
pub fn solve_on_sites(d: u32, n: usize, sites: &[usize], rows: &[(&WeylOp, u8)]) -> Option<WeylOp> {
    let d8 = d as u8;
    for size in 1..=sites.len() {
        for subset in combinations(sites, size) {
            let a: Vec<Vec<u8>> = rows
                .iter()
                .map(|(op, _)| {
                    let mut r = Vec::with_capacity(2 * subset.len());
                    for &s in &subset {
                        r.push(op.z_exp()[s]);
                        r.push(modular::neg(op.x_exp()[s], d8));
                    }
                    r
                })
                .collect();
            let b: Vec<u8> = rows.iter().map(|(_, t)| *t).collect();
            if let Some(x) = modular::solve(&a, &b, d8) {
                if x.iter().all(|&v| v == 0) && b.iter().any(|&v| v != 0) {
                    continue;
                }
                let mut w = WeylOp::identity(d, n).ok()?;
                for (j, &s) in subset.iter().enumerate() {
                    w.set_site(s, x[2 * j], x[2 * j + 1]);
                }
                return Some(w);
            }
        }
    }
    None
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == items.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Operator on the sites shared by two checks that shifts the first check's eigenvalue
/// exponent by `shift` while leaving every check other than `to` untouched.
pub fn transfer_operator(checks: &CheckSet, d: u32, n: usize, from: &str, to: &str, shift: u8) -> Result<WeylOp> {
    let f = checks.get(from)?;
    let t = checks.get(to)?;
    let sites: Vec<usize> = f.op.support().into_iter().filter(|s| t.op.support().contains(s)).collect();
    if sites.is_empty() {
        return Err(Error::InvalidPath(format!("{from} and {to} share no site")));
    }
    let rows: Vec<(&WeylOp, u8)> = checks
        .checks()
        .iter()
        .filter(|c| c.label != to && sites.iter().any(|&s| c.op.x_exp()[s] != 0 || c.op.z_exp()[s] != 0))
        .map(|c| (&c.op, if c.label == from { shift } else { 0 }))
        .collect();
    solve_on_sites(d, n, &sites, &rows)
        .ok_or_else(|| Error::InvalidPath(format!("no operator on shared sites moves {from} to {to}")))
}

/// Operator that removes the excitation `shift` from check `from` and deposits it on `to`.
///
/// Candidate sites are the union of both supports, shared sites first. Every other check
/// touching a candidate must stay untouched; nonlocal checks are allowed to absorb the
/// difference only when no solution leaves them alone (a string crossing a defect line).
pub fn hop_operator(checks: &CheckSet, d: u32, n: usize, from: &str, to: &str, shift: u8) -> Result<WeylOp> {
    let f = checks.get(from)?;
    let t = checks.get(to)?;
    let fs = f.op.support();
    let ts = t.op.support();
    let mut sites: Vec<usize> = fs.iter().copied().filter(|s| ts.contains(s)).collect();
    sites.extend(fs.iter().chain(&ts).copied().filter(|s| !(fs.contains(s) && ts.contains(s))));
    sites.dedup();
    let touching: Vec<&Check> = checks
        .checks()
        .iter()
        .filter(|c| c.label != from && c.label != to && sites.iter().any(|&s| c.op.x_exp()[s] != 0 || c.op.z_exp()[s] != 0))
        .collect();
    for free_nonlocal in [false, true] {
        for target in 1..d as u8 {
            let mut rows: Vec<(&WeylOp, u8)> = vec![(&f.op, shift), (&t.op, target)];
            rows.extend(
                touching
                    .iter()
                    .filter(|c| !(free_nonlocal && c.kind == CheckKind::Nonlocal))
                    .map(|c| (&c.op, 0)),
            );
            if let Some(w) = solve_on_sites(d, n, &sites, &rows) {
                return Ok(w);
            }
        }
    }
    Err(Error::InvalidPath(format!("no local operator moves an excitation from {from} to {to}")))
}

/// Single-site operator on `site` that moves the excitation `shift` off `host`.
///
/// Exactly one other local check must absorb it, measured checks stay untouched and
/// nonlocal checks are free. Returns the new host and the operator; fails when no
/// power works or when different powers would move the anyon to different checks.
pub fn drag_operator(checks: &CheckSet, d: u32, n: usize, host: &str, site: usize, shift: u8) -> Result<(String, WeylOp)> {
    let h = checks.get(host)?;
    if site >= n || h.op.site(site) == (0, 0) {
        return Err(Error::InvalidPath(format!("site {site} is not in the support of {host}")));
    }
    let touching: Vec<&Check> =
        checks.checks().iter().filter(|c| c.label != host && c.op.site(site) != (0, 0)).collect();
    let mut found: Option<(String, WeylOp)> = None;
    for a in 0..d as u8 {
        for b in 0..d as u8 {
            if (a, b) == (0, 0) {
                continue;
            }
            let mut k = WeylOp::identity(d, n)?;
            k.set_site(site, a, b);
            if k.symplectic_product(&h.op)? != shift {
                continue;
            }
            let mut target = None;
            let mut ok = true;
            for c in &touching {
                let sp = k.symplectic_product(&c.op)?;
                if sp == 0 || c.kind == CheckKind::Nonlocal {
                    continue;
                }
                if c.kind == CheckKind::Measured || target.is_some() {
                    ok = false;
                    break;
                }
                target = Some(c.label.clone());
            }
            let Some(t) = target.filter(|_| ok) else { continue };
            match &found {
                None => found = Some((t, k)),
                Some((prev, _)) if *prev != t => {
                    return Err(Error::InvalidPath(format!("step over site {site} from {host} is ambiguous")))
                }
                Some(_) => {}
            }
        }
    }
    found.ok_or_else(|| Error::InvalidPath(format!("no operator on site {site} moves the anyon on {host}")))
}
