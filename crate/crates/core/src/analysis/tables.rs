use super::bounds::{topological_qutrit_bounds, FidelityBound};
use crate::error::{Error, Result};
use crate::toric::{Frame, QutritSector};

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}

fn err(e: csv::Error) -> Error {
    Error::Serde(e.to_string())
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

/// One row per ancilla outcome: projector triples, correlators and fidelity bounds.
pub fn qutrit_table_csv(rows: &[QutritSector]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "outcome", "shots", "charge_0", "charge_1", "charge_2", "flux_1", "flux_w", "flux_wbar", "endpoint_a",
        "endpoint_b", "joint", "nonlocal_a", "nonlocal_b", "lower", "upper",
    ])
    .map_err(err)?;
    for r in rows {
        let b = topological_qutrit_bounds(r.charge_loop, r.flux_loop, r.outcome as usize).ok();
        let mut rec = vec![r.outcome.to_string(), r.shots.to_string()];
        rec.extend(r.charge_loop.iter().chain(&r.flux_loop).chain(&r.endpoints).map(|&x| num(x)));
        rec.push(num(r.joint));
        rec.extend(r.nonlocal.iter().map(|&x| num(x)));
        rec.push(b.as_ref().map_or(String::new(), |b| num(b.lower)));
        rec.push(b.as_ref().map_or(String::new(), |b| num(b.upper)));
        w.write_record(&rec).map_err(err)?;
    }
    finish(w)
}

/// Per-plaquette estimates, with an optional mitigated column.
pub fn plaquette_table_csv(labels: &[String], pi1: &[f64], mitigated: Option<&[f64]>) -> Result<String> {
    if labels.len() != pi1.len() || mitigated.is_some_and(|m| m.len() != pi1.len()) {
        return Err(Error::InvalidArgument("column lengths differ".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["plaquette", "pi1"];
    if mitigated.is_some() {
        header.push("pi1_mitigated");
    }
    w.write_record(&header).map_err(err)?;
    for (i, l) in labels.iter().enumerate() {
        let mut rec = vec![l.clone(), num(pi1[i])];
        if let Some(m) = mitigated {
            rec.push(num(m[i]));
        }
        w.write_record(&rec).map_err(err)?;
    }
    finish(w)
}

/// Every check of every frame: projector triple and argument of the expectation.
pub fn frames_csv(frames: &[Frame]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "label", "kind", "pi_1", "pi_w", "pi_wbar", "arg_deg"]).map_err(err)?;
    for f in frames {
        for s in &f.snapshots {
            let mut rec = vec![f.step.clone(), s.label.clone(), format!("{:?}", s.kind)];
            rec.extend(s.projectors.iter().map(|&x| num(x)));
            rec.push(s.arg_deg.map_or(String::new(), num));
            w.write_record(&rec).map_err(err)?;
        }
    }
    finish(w)
}

pub fn bounds_csv(bounds: &[FidelityBound]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tr_p", "tr_q", "n_sites", "lower", "upper", "per_site_lower", "per_site_upper"]).map_err(err)?;
    for b in bounds {
        w.write_record([
            num(b.tr_p),
            num(b.tr_q),
            b.n_sites.to_string(),
            num(b.lower),
            num(b.upper),
            num(b.per_site_lower),
            num(b.per_site_upper),
        ])
        .map_err(err)?;
    }
    finish(w)
}
