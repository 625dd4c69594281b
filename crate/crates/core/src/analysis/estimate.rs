use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spam::{spam_mitigate, ConfusionMatrix};
use crate::circuit::{run_shots, shot_seed, Circuit};
use crate::encoder::{decode_pair, encode_record, readout_flips, MeasureBasis};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::toric::{PlaquetteSnapshot, TorusLattice};
use crate::weyl::WeylOp;

/// −(Σ_p Π¹_p)/n_plaquettes over every plaquette of the lattice.
pub fn energy_density(snapshots: &[PlaquetteSnapshot], lattice: &TorusLattice) -> Result<f64> {
    let values = lattice
        .plaquettes()
        .iter()
        .map(|p| {
            let label = p.label();
            snapshots
                .iter()
                .find(|s| s.label == label)
                .and_then(|s| s.projectors.first().copied())
                .ok_or_else(|| Error::InvalidArgument(format!("missing plaquette {label}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    energy_from_values(&values)
}

/// −mean of the given Π¹ values.
pub fn energy_from_values(pi1: &[f64]) -> Result<f64> {
    if pi1.is_empty() {
        return Err(Error::InvalidArgument("no plaquettes".into()));
    }
    Ok(-pi1.iter().sum::<f64>() / pi1.len() as f64)
}

pub fn binomial_se(p: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("standard error of zero shots".into()));
    }
    Ok((p * (1.0 - p) / n as f64).max(0.0).sqrt())
}

/// Binomial errors of (hits, shots) pairs and their maximum.
pub fn standard_errors(counts: &[(usize, usize)]) -> Result<(Vec<f64>, f64)> {
    let se = counts.iter().map(|&(k, n)| binomial_se(k as f64 / n.max(1) as f64, n)).collect::<Result<Vec<f64>>>()?;
    let max = se.iter().copied().fold(0.0, f64::max);
    Ok((se, max))
}

/// Bootstrap standard error of the mean of indicator samples.
pub fn bootstrap_se(samples: &[bool], resamples: usize, seed: u64) -> Result<f64> {
    if samples.is_empty() || resamples < 2 {
        return Err(Error::InvalidArgument("bootstrap needs samples and at least two resamples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = samples.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).filter(|_| samples[rng.gen_range(0..n)]).count() as f64 / n as f64)
        .collect();
    let mu = means.iter().sum::<f64>() / resamples as f64;
    Ok((means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt())
}

/// Row- and column-averaged Π¹ of the four logical string operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalValues {
    pub z_hori: f64,
    pub z_vert: f64,
    pub x_hori: f64,
    pub x_vert: f64,
}

pub fn logical_values(lattice: &TorusLattice, t: &StabilizerTableau) -> Result<LogicalValues> {
    let avg = |ops: Vec<WeylOp>| -> Result<f64> {
        let n = ops.len() as f64;
        Ok(ops.iter().map(|w| t.projector_expectation(w, 0)).collect::<Result<Vec<f64>>>()?.iter().sum::<f64>() / n)
    };
    let rows = 0..lattice.ly();
    let cols = 0..lattice.lx();
    Ok(LogicalValues {
        z_hori: avg(rows.clone().map(|y| lattice.z_hori(y)).collect())?,
        z_vert: avg(cols.clone().map(|x| lattice.z_vert(x)).collect())?,
        x_hori: avg(rows.map(|y| lattice.x_hori(y)).collect())?,
        x_vert: avg(cols.map(|x| lattice.x_vert(x)).collect())?,
    })
}

/// [`LogicalValues`] estimated from a Z-basis and an X-basis measure-all run,
/// readout-mitigated when `cm` is given.
pub fn sampled_logical_values(
    lattice: &TorusLattice,
    z_run: &MeasureAllRun,
    x_run: &MeasureAllRun,
    cm: Option<&ConfusionMatrix>,
) -> Result<LogicalValues> {
    let avg = |run: &MeasureAllRun, ops: Vec<WeylOp>| -> Result<f64> {
        let n = ops.len() as f64;
        let mut total = 0.0;
        for w in &ops {
            total += match cm {
                Some(cm) => run.pi1_mitigated(w, cm)?,
                None => run.pi1(w)?,
            };
        }
        Ok(total / n)
    };
    let rows = 0..lattice.ly();
    let cols = 0..lattice.lx();
    Ok(LogicalValues {
        z_hori: avg(z_run, rows.clone().map(|y| lattice.z_hori(y)).collect())?,
        z_vert: avg(z_run, cols.clone().map(|x| lattice.z_vert(x)).collect())?,
        x_hori: avg(x_run, rows.map(|y| lattice.x_hori(y)).collect())?,
        x_vert: avg(x_run, cols.map(|x| lattice.x_vert(x)).collect())?,
    })
}

/// Destructive single-basis readout of every qutrit, as qubit pairs after readout
/// noise. Shots heralded by leakage or by a 01 readout are counted and dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureAllRun {
    pub basis: MeasureBasis,
    pub shots: usize,
    pub leak_heralded: usize,
    pub readout_heralded: usize,
    /// Retained shots, one (q1, q2) pair per qutrit.
    pub records: Vec<Vec<[u8; 2]>>,
}

/// Runs `c` followed by a measurement of every qutrit in `basis`.
pub fn sample_measure_all(
    c: &Circuit,
    basis: MeasureBasis,
    shots: usize,
    seed: u64,
    readout: &ConfusionMatrix,
    threads: usize,
) -> Result<MeasureAllRun> {
    sample_measure_all_with(c, basis, shots, seed, readout, threads, true)
}

/// As [`sample_measure_all`]; with `herald_discard` false, shots flagged by leakage
/// are kept with their simulated outcomes. Readout patterns outside the encoding
/// cannot be decoded and are always dropped.
pub fn sample_measure_all_with(
    c: &Circuit,
    basis: MeasureBasis,
    shots: usize,
    seed: u64,
    readout: &ConfusionMatrix,
    threads: usize,
    herald_discard: bool,
) -> Result<MeasureAllRun> {
    let n = c.n_qudits();
    let mut m = c.clone();
    let base = m.n_cregs();
    for s in 0..n {
        let w = match basis {
            MeasureBasis::Z => WeylOp::z_on(c.d(), n, s)?,
            MeasureBasis::X => WeylOp::x_on(c.d(), n, s)?,
        };
        m.measure(w)?;
    }
    let batch = run_shots(&m, shots, seed, threads)?;
    let mut run = MeasureAllRun { basis, shots, leak_heralded: 0, readout_heralded: 0, records: Vec::new() };
    for (i, r) in batch.records.iter().enumerate() {
        if r.herald_discard && herald_discard {
            run.leak_heralded += 1;
            continue;
        }
        let mut bits = encode_record(&r.creg_values[base..]);
        let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed ^ 0x7265_6164_6f75_7400, i as u64));
        readout_flips(&mut bits, readout.p01, readout.p10, &mut rng);
        if bits.iter().all(|&b| decode_pair(b).is_some()) {
            run.records.push(bits);
        } else {
            run.readout_heralded += 1;
        }
    }
    Ok(run)
}

impl MeasureAllRun {
    pub fn discard_fraction(&self) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        (self.leak_heralded + self.readout_heralded) as f64 / self.shots as f64
    }

    /// Sites and exponents of an operator diagonal in this run's basis.
    fn factors(&self, op: &WeylOp) -> Result<Vec<(usize, u8)>> {
        let ok = match self.basis {
            MeasureBasis::Z => op.is_z_type(),
            MeasureBasis::X => op.is_x_type(),
        };
        if !ok {
            return Err(Error::BasisMismatch(format!("{} is not diagonal in the {:?} basis", op.label(), self.basis)));
        }
        Ok(op
            .support()
            .into_iter()
            .map(|s| {
                let (x, z) = op.site(s);
                (s, if self.basis == MeasureBasis::Z { z } else { x })
            })
            .collect())
    }

    /// True when ω^phase ∏ ω^(e·level) = 1 over (exponent, level) pairs.
    fn in_unit_sector(phase: u8, pairs: impl Iterator<Item = (u8, u8)>) -> bool {
        pairs.fold(phase as u32, |acc, (e, l)| acc + e as u32 * l as u32) % 3 == 0
    }

    /// Fraction of retained shots in the eigenvalue-1 sector of `op`.
    pub fn pi1(&self, op: &WeylOp) -> Result<f64> {
        let f = self.factors(op)?;
        if self.records.is_empty() {
            return Err(Error::InvalidArgument("no retained shots".into()));
        }
        let hits = self
            .records
            .iter()
            .filter(|r| Self::in_unit_sector(op.phase(), f.iter().map(|&(s, e)| (e, decode_pair(r[s]).expect("retained")))))
            .count();
        Ok(hits as f64 / self.records.len() as f64)
    }

    /// Π¹ of `op` after inverting the readout confusion on the operator's qubits.
    /// The estimate is conditioned on the encoded patterns of the corrected distribution.
    pub fn pi1_mitigated(&self, op: &WeylOp, cm: &ConfusionMatrix) -> Result<f64> {
        let f = self.factors(op)?;
        if self.records.is_empty() {
            return Err(Error::InvalidArgument("no retained shots".into()));
        }
        let width = 2 * f.len();
        let mut dist = vec![0.0; 1 << width];
        for r in &self.records {
            let idx = f.iter().enumerate().fold(0usize, |acc, (j, &(s, _))| {
                acc | (r[s][0] as usize) << (2 * j) | (r[s][1] as usize) << (2 * j + 1)
            });
            dist[idx] += 1.0;
        }
        let total = self.records.len() as f64;
        dist.iter_mut().for_each(|p| *p /= total);
        let m = spam_mitigate(&dist, width, cm)?;
        let (mut valid, mut good) = (0.0, 0.0);
        for (i, p) in m.probs.iter().enumerate() {
            let levels: Option<Vec<u8>> =
                (0..f.len()).map(|j| decode_pair([((i >> (2 * j)) & 1) as u8, ((i >> (2 * j + 1)) & 1) as u8])).collect();
            if let Some(l) = levels {
                valid += p;
                if Self::in_unit_sector(op.phase(), f.iter().zip(&l).map(|(&(_, e), &v)| (e, v))) {
                    good += p;
                }
            }
        }
        Ok(good / valid)
    }
}

/// Sampled Π¹ of every plaquette and the energy density from one Z-basis and one
/// X-basis run: B plaquettes are read in Z, A plaquettes in X.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPlaquettes {
    pub labels: Vec<String>,
    pub pi1: Vec<f64>,
    pub pi1_mitigated: Vec<f64>,
    pub energy: f64,
    pub energy_mitigated: f64,
    pub discard_fraction: f64,
    /// Largest binomial standard error of the raw estimates.
    pub max_se: f64,
}

pub fn sampled_plaquettes(
    lattice: &TorusLattice,
    z_run: &MeasureAllRun,
    x_run: &MeasureAllRun,
    cm: &ConfusionMatrix,
) -> Result<SampledPlaquettes> {
    let mut out = SampledPlaquettes {
        labels: Vec::new(),
        pi1: Vec::new(),
        pi1_mitigated: Vec::new(),
        energy: 0.0,
        energy_mitigated: 0.0,
        discard_fraction: (z_run.discard_fraction() + x_run.discard_fraction()) / 2.0,
        max_se: 0.0,
    };
    for p in lattice.plaquettes() {
        let op = lattice.op(p);
        let run = if op.is_z_type() { z_run } else { x_run };
        let v = run.pi1(&op)?;
        out.max_se = out.max_se.max(binomial_se(v, run.records.len())?);
        out.labels.push(p.label());
        out.pi1.push(v);
        out.pi1_mitigated.push(run.pi1_mitigated(&op, cm)?);
    }
    out.energy = energy_from_values(&out.pi1)?;
    out.energy_mitigated = energy_from_values(&out.pi1_mitigated)?;
    Ok(out)
}
