use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Depolarizing1,
    Depolarizing2,
    WeylCustom,
    /// Heralded leakage; only emitted by the qubit-encoder lowering.
    Leakage,
}

/// A local Weyl error on the channel's sites with its absolute probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedWeyl {
    pub x: Vec<u8>,
    pub z: Vec<u8>,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightedWeyl>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoiseEvent {
    None,
    /// (x, z) exponents per channel site
    Weyl(Vec<(u8, u8)>),
    Leak,
}

impl NoiseChannel {
    pub fn depolarizing1(p: f64) -> Self {
        NoiseChannel { kind: NoiseKind::Depolarizing1, p, weights: None }
    }

    pub fn depolarizing2(p: f64) -> Self {
        NoiseChannel { kind: NoiseKind::Depolarizing2, p, weights: None }
    }

    pub fn leakage(p: f64) -> Self {
        NoiseChannel { kind: NoiseKind::Leakage, p, weights: None }
    }

    pub fn weyl_custom(weights: Vec<WeightedWeyl>) -> Self {
        let p = weights.iter().map(|w| w.p).sum();
        NoiseChannel { kind: NoiseKind::WeylCustom, p, weights: Some(weights) }
    }

    pub fn validate(&self, d: u32, n_sites: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !self.p.is_finite() {
            return Err(Error::InvalidNoise(format!("probability {} outside [0,1]", self.p)));
        }
        match self.kind {
            NoiseKind::Depolarizing1 if n_sites != 1 => {
                Err(Error::InvalidNoise("depolarizing1 needs one site".into()))
            }
            NoiseKind::Depolarizing2 if n_sites != 2 => {
                Err(Error::InvalidNoise("depolarizing2 needs two sites".into()))
            }
            NoiseKind::WeylCustom => {
                let ws = self
                    .weights
                    .as_ref()
                    .ok_or_else(|| Error::InvalidNoise("weyl_custom without weights".into()))?;
                let mut total = 0.0;
                for w in ws {
                    if w.x.len() != n_sites || w.z.len() != n_sites {
                        return Err(Error::InvalidNoise("weight label has wrong width".into()));
                    }
                    if w.x.iter().chain(&w.z).any(|&e| e as u32 >= d) {
                        return Err(Error::InvalidNoise("weight exponent out of range".into()));
                    }
                    if w.x.iter().chain(&w.z).all(|&e| e == 0) {
                        return Err(Error::InvalidNoise("identity label in weights".into()));
                    }
                    if !(0.0..=1.0).contains(&w.p) {
                        return Err(Error::InvalidNoise(format!("weight {} outside [0,1]", w.p)));
                    }
                    total += w.p;
                }
                if total > 1.0 + 1e-12 {
                    return Err(Error::InvalidNoise(format!("weights sum to {total} > 1")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, d: u32, n_sites: usize, rng: &mut R) -> NoiseEvent {
        match self.kind {
            NoiseKind::Depolarizing1 | NoiseKind::Depolarizing2 => {
                if rng.gen::<f64>() >= self.p {
                    return NoiseEvent::None;
                }
                let total = (d as usize).pow(2 * n_sites as u32);
                let idx = rng.gen_range(1..total);
                NoiseEvent::Weyl(decode_label(idx, d, n_sites))
            }
            NoiseKind::WeylCustom => {
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                for w in self.weights.iter().flatten() {
                    acc += w.p;
                    if r < acc {
                        return NoiseEvent::Weyl(w.x.iter().copied().zip(w.z.iter().copied()).collect());
                    }
                }
                NoiseEvent::None
            }
            NoiseKind::Leakage => {
                if rng.gen::<f64>() < self.p {
                    NoiseEvent::Leak
                } else {
                    NoiseEvent::None
                }
            }
        }
    }

    /// Every possible outcome with its probability (for exhaustive oracles).
    pub fn enumerate(&self, d: u32, n_sites: usize) -> Vec<(f64, NoiseEvent)> {
        match self.kind {
            NoiseKind::Depolarizing1 | NoiseKind::Depolarizing2 => {
                let total = (d as usize).pow(2 * n_sites as u32);
                let mut out = vec![(1.0 - self.p, NoiseEvent::None)];
                for idx in 1..total {
                    out.push((self.p / (total - 1) as f64, NoiseEvent::Weyl(decode_label(idx, d, n_sites))));
                }
                out
            }
            NoiseKind::WeylCustom => {
                let ws = self.weights.clone().unwrap_or_default();
                let rest = 1.0 - ws.iter().map(|w| w.p).sum::<f64>();
                let mut out = vec![(rest, NoiseEvent::None)];
                for w in ws {
                    out.push((w.p, NoiseEvent::Weyl(w.x.iter().copied().zip(w.z.iter().copied()).collect())));
                }
                out
            }
            NoiseKind::Leakage => vec![(1.0 - self.p, NoiseEvent::None), (self.p, NoiseEvent::Leak)],
        }
    }
}

/// Label index → per-site (x, z); index digits run (x_0, z_0, x_1, z_1, …) least significant first.
fn decode_label(mut idx: usize, d: u32, n_sites: usize) -> Vec<(u8, u8)> {
    let d = d as usize;
    (0..n_sites)
        .map(|_| {
            let x = idx % d;
            idx /= d;
            let z = idx % d;
            idx /= d;
            (x as u8, z as u8)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_sums_to_one() {
        for ch in [NoiseChannel::depolarizing1(0.3), NoiseChannel::depolarizing2(1.0)] {
            let n = if ch.kind == NoiseKind::Depolarizing1 { 1 } else { 2 };
            let ev = ch.enumerate(3, n);
            assert_eq!(ev.len(), 9usize.pow(n as u32));
            assert!((ev.iter().map(|e| e.0).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(NoiseChannel::depolarizing2(0.1).validate(3, 1).is_err());
        assert!(NoiseChannel::depolarizing1(1.5).validate(3, 1).is_err());
        let bad = NoiseChannel::weyl_custom(vec![
            WeightedWeyl { x: vec![1], z: vec![0], p: 0.7 },
            WeightedWeyl { x: vec![0], z: vec![1], p: 0.7 },
        ]);
        assert!(bad.validate(3, 1).is_err());
        let id = NoiseChannel::weyl_custom(vec![WeightedWeyl { x: vec![0], z: vec![0], p: 0.1 }]);
        assert!(id.validate(3, 1).is_err());
    }
}
