use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Independent per-qubit readout errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// P(read 0 | qubit in 1)
    pub p01: f64,
    /// P(read 1 | qubit in 0)
    pub p10: f64,
}

impl ConfusionMatrix {
    pub fn new(p01: f64, p10: f64) -> Result<Self> {
        for p in [p01, p10] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidArgument(format!("readout error {p} outside [0, 0.5)")));
            }
        }
        Ok(ConfusionMatrix { p01, p10 })
    }

    pub fn ideal() -> Self {
        ConfusionMatrix { p01: 0.0, p10: 0.0 }
    }

    /// Rates of the trapped-ion device used as the calibration anchor.
    pub fn calibrated() -> Self {
        ConfusionMatrix { p01: 2.37e-3, p10: 0.82e-3 }
    }

    /// M[read][true].
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p10, self.p01], [self.p10, 1.0 - self.p01]]
    }

    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = 1.0 - self.p01 - self.p10;
        if det <= 0.0 {
            return Err(Error::InvalidArgument(format!("singular confusion matrix (p01 + p10 = {})", 1.0 - det)));
        }
        Ok([[(1.0 - self.p01) / det, -self.p01 / det], [-self.p10 / det, (1.0 - self.p10) / det]])
    }
}

/// Corrected distribution. Negative entries are kept and flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub probs: Vec<f64>,
    pub has_negative: bool,
    pub min: f64,
}

fn check_width(dist: &[f64], width: usize) -> Result<()> {
    if width > 24 || dist.len() != 1 << width {
        return Err(Error::InvalidArgument(format!("distribution of length {} is not over {width} bits", dist.len())));
    }
    Ok(())
}

/// Applies a 2×2 matrix to every bit (bit i of the index is qubit i).
fn per_bit(dist: &[f64], width: usize, m: [[f64; 2]; 2]) -> Vec<f64> {
    let mut v = dist.to_vec();
    for q in 0..width {
        let bit = 1 << q;
        for i in 0..v.len() {
            if i & bit == 0 {
                let (a, b) = (v[i], v[i | bit]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    v
}

/// Readout-noisy image of a true distribution.
pub fn apply_confusion(dist: &[f64], width: usize, cm: &ConfusionMatrix) -> Result<Vec<f64>> {
    check_width(dist, width)?;
    Ok(per_bit(dist, width, cm.matrix()))
}

/// Tensor-product inverse of the confusion matrix applied to an empirical distribution.
pub fn spam_mitigate(dist: &[f64], width: usize, cm: &ConfusionMatrix) -> Result<Mitigated> {
    check_width(dist, width)?;
    let probs = per_bit(dist, width, cm.inverse()?);
    let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Mitigated { has_negative: min < 0.0, min, probs })
}
