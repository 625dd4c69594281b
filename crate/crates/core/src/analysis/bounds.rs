use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-projector fidelity bound: for a target stabilized by commuting projectors
/// P and Q, Tr[ρPQ] lies in [Tr ρP + Tr ρQ − 1, min(Tr ρP, Tr ρQ)].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub tr_p: f64,
    pub tr_q: f64,
    pub lower: f64,
    pub upper: f64,
    pub per_site_lower: f64,
    pub per_site_upper: f64,
    pub n_sites: usize,
    /// Set when an input outside [0, 1] was clamped.
    pub clamped: bool,
    /// Standard errors propagated from the inputs, when supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<BoundErrors>,
}

/// Standard errors of the bound entries: the lower bound adds the input errors in
/// quadrature, the upper bound inherits the error of the smaller input, and the
/// per-site roots use the first-order expansion of b^(1/n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundErrors {
    pub lower: f64,
    pub upper: f64,
    pub per_site_lower: f64,
    pub per_site_upper: f64,
}

fn clamp_unit(x: f64, flag: &mut bool) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        *flag = true;
    }
    x.clamp(0.0, 1.0)
}

pub fn fidelity_bounds(tr_p: f64, tr_q: f64, n_sites: usize) -> Result<FidelityBound> {
    if n_sites < 1 {
        return Err(Error::InvalidArgument("n_sites must be at least 1".into()));
    }
    if !tr_p.is_finite() || !tr_q.is_finite() {
        return Err(Error::InvalidArgument("projector expectations must be finite".into()));
    }
    let mut clamped = false;
    let (p, q) = (clamp_unit(tr_p, &mut clamped), clamp_unit(tr_q, &mut clamped));
    let lower = (p + q - 1.0).max(0.0);
    let upper = p.min(q);
    let root = |b: f64| b.powf(1.0 / n_sites as f64);
    Ok(FidelityBound {
        tr_p,
        tr_q,
        lower,
        upper,
        per_site_lower: root(lower),
        per_site_upper: root(upper),
        n_sites,
        clamped,
        se: None,
    })
}

/// [`fidelity_bounds`] with binomial standard errors on the inputs.
pub fn fidelity_bounds_with_errors(tr_p: f64, se_p: f64, tr_q: f64, se_q: f64, n_sites: usize) -> Result<FidelityBound> {
    let mut b = fidelity_bounds(tr_p, tr_q, n_sites)?;
    let lower = if b.lower > 0.0 { se_p.hypot(se_q) } else { 0.0 };
    let upper = if tr_p <= tr_q { se_p } else { se_q };
    let n = n_sites as f64;
    let root_se = |v: f64, se: f64| if v > 0.0 { v.powf(1.0 / n - 1.0) * se / n } else { 0.0 };
    b.se = Some(BoundErrors {
        lower,
        upper,
        per_site_lower: root_se(b.lower, lower),
        per_site_upper: root_se(b.upper, upper),
    });
    Ok(b)
}

/// Bound for ancilla outcome j of the topological qutrit: P is the weight of the
/// charge loop on ω^j and Q the Π¹ weight of the flux loop.
pub fn topological_qutrit_bounds(charge_loop: [f64; 3], flux_loop: [f64; 3], j: usize) -> Result<FidelityBound> {
    if j > 2 {
        return Err(Error::InvalidArgument(format!("ancilla outcome {j} is not in 0..3")));
    }
    fidelity_bounds(charge_loop[j], flux_loop[0], 1)
}
