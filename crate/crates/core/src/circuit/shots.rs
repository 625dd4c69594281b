use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Circuit, Instruction, NoiseEvent};
use crate::error::{Error, Result};
use crate::tableau::StabilizerTableau;
use crate::weyl::WeylOp;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShotRecord {
    pub creg_values: Vec<u8>,
    pub herald_discard: bool,
    pub seed: u64,
}

/// Callback invoked after every instruction of a shot (index, tableau).
pub type ShotHook<'a> = dyn FnMut(usize, &StabilizerTableau) + 'a;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of shot `i`; a fixed function of (base, i) so scheduling cannot matter.
pub fn shot_seed(base: u64, i: u64) -> u64 {
    splitmix64(splitmix64(base) ^ i.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn run_shot(c: &Circuit, seed: u64) -> Result<ShotRecord> {
    let mut t = StabilizerTableau::new_computational(c.d(), c.n_qudits())?.with_seed(seed);
    let mut rec = ShotRecord { creg_values: vec![0; c.n_cregs()], herald_discard: false, seed };
    execute(c, &mut t, &mut rec, None)?;
    Ok(rec)
}

/// Runs a shot and returns the final tableau; `hook` sees the state after each instruction.
pub fn run_shot_with(
    c: &Circuit,
    seed: u64,
    hook: Option<&mut ShotHook<'_>>,
) -> Result<(ShotRecord, StabilizerTableau)> {
    let mut t = StabilizerTableau::new_computational(c.d(), c.n_qudits())?.with_seed(seed);
    let mut rec = ShotRecord { creg_values: vec![0; c.n_cregs()], herald_discard: false, seed };
    execute(c, &mut t, &mut rec, hook)?;
    Ok((rec, t))
}

/// Executes `c` on an existing tableau, writing registers into `rec`.
///
/// `rec.creg_values` must have at least `c.n_cregs()` entries; the tableau's
/// own RNG drives both measurements and noise.
pub fn execute(
    c: &Circuit,
    t: &mut StabilizerTableau,
    rec: &mut ShotRecord,
    mut hook: Option<&mut ShotHook<'_>>,
) -> Result<()> {
    if rec.creg_values.len() < c.n_cregs() {
        return Err(Error::CregOutOfRange { index: c.n_cregs(), n: rec.creg_values.len() });
    }
    let mut written = vec![false; c.n_cregs()];
    for (idx, ins) in c.instructions().iter().enumerate() {
        match ins {
            Instruction::Gate(g) => t.apply_gate(g)?,
            Instruction::Measure { observable, creg } => {
                rec.creg_values[*creg] = t.measure_weyl(observable)?.value;
                written[*creg] = true;
            }
            Instruction::CondGate { creg, branches } => {
                if !written[*creg] {
                    return Err(Error::CregUnwritten(*creg));
                }
                let v = rec.creg_values[*creg] as usize;
                let branch = branches
                    .get(v)
                    .ok_or_else(|| Error::MalformedCondition(format!("no branch for outcome {v}")))?;
                t.apply_gates(branch)?;
            }
            Instruction::Noise { channel, sites } => {
                match channel.sample(c.d(), sites.len(), t.rng_mut()) {
                    NoiseEvent::None => {}
                    NoiseEvent::Leak => rec.herald_discard = true,
                    NoiseEvent::Weyl(labels) => {
                        let mut w = WeylOp::identity(c.d(), c.n_qudits())?;
                        for (&s, &(a, b)) in sites.iter().zip(&labels) {
                            w.set_site(s, a, b);
                        }
                        t.apply_weyl(&w)?;
                    }
                }
            }
            Instruction::Barrier => {}
        }
        if let Some(h) = hook.as_mut() {
            h(idx, t);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotBatch {
    pub records: Vec<ShotRecord>,
}

impl ShotBatch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn retained(&self) -> impl Iterator<Item = &ShotRecord> {
        self.records.iter().filter(|r| !r.herald_discard)
    }

    pub fn discard_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.herald_discard).count() as f64 / self.records.len() as f64
    }

    /// Outcome counts of one register over retained shots.
    pub fn histogram(&self, creg: usize, d: u32) -> Vec<usize> {
        let mut h = vec![0; d as usize];
        for r in self.retained() {
            h[r.creg_values[creg] as usize] += 1;
        }
        h
    }

    /// Joint outcome counts (sorted by outcome vector), order independent.
    pub fn joint_counts(&self) -> std::collections::BTreeMap<Vec<u8>, usize> {
        let mut m = std::collections::BTreeMap::new();
        for r in self.retained() {
            *m.entry(r.creg_values.clone()).or_insert(0) += 1;
        }
        m
    }
}

/// Runs `n_shots` shots with seeds `shot_seed(base_seed, i)` on up to `parallelism` threads.
pub fn run_shots(c: &Circuit, n_shots: usize, base_seed: u64, parallelism: usize) -> Result<ShotBatch> {
    c.validate()?;
    let work = || -> Result<Vec<ShotRecord>> {
        (0..n_shots)
            .into_par_iter()
            .map(|i| run_shot(c, shot_seed(base_seed, i as u64)))
            .collect()
    };
    let records = if parallelism <= 1 {
        (0..n_shots).map(|i| run_shot(c, shot_seed(base_seed, i as u64))).collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(work)?
    };
    Ok(ShotBatch { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NoiseChannel;
    use crate::weyl::{CliffordGate, GateKind};

    fn noisy() -> Circuit {
        let mut c = Circuit::new(3, 2).unwrap();
        c.gate1(GateKind::Fourier, 0).unwrap();
        c.gate2(GateKind::CX, 0, 1).unwrap();
        c.noise(NoiseChannel::depolarizing2(0.3), vec![0, 1]).unwrap();
        let r = c.measure(WeylOp::x_on(3, 2, 0).unwrap()).unwrap();
        c.cond(r, vec![vec![], vec![CliffordGate::one(GateKind::ShiftX, 1)], vec![]]).unwrap();
        c.measure(WeylOp::z_on(3, 2, 1).unwrap()).unwrap();
        c
    }

    #[test]
    fn replay_is_deterministic() {
        let c = noisy();
        for s in 0..20 {
            assert_eq!(run_shot(&c, s).unwrap(), run_shot(&c, s).unwrap());
        }
    }

    #[test]
    fn parallelism_does_not_change_records() {
        let c = noisy();
        let a = run_shots(&c, 300, 7, 1).unwrap();
        let b = run_shots(&c, 300, 7, 8).unwrap();
        assert_eq!(a, b);
    }
}
