use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use z3tc::circuit::{run_shots, Circuit};
use z3tc::dense::{circuit_distribution, gate_matrix, weyl_matrix};
use z3tc::encoder::{verify_decomposition, QutritGate};
use z3tc::weyl::conjugate_by_gate;
use z3tc::{CliffordGate, GateKind, WeylOp};

use crate::commands::{csv_string, Outcome};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
struct Suite {
    name: &'static str,
    passed: bool,
    checked: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, passed: true, checked: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < 20 {
                self.failures.push(what());
            }
        }
    }
}

fn conjugation_tables() -> Result<Suite, CliError> {
    let mut s = Suite::new("conjugation_tables");
    for d in [3u32, 5] {
        for kind in GateKind::ALL {
            let k = kind.arity();
            let g = if k == 1 { CliffordGate::one(kind, 0) } else { CliffordGate::two(kind, 0, 1) };
            let u = gate_matrix(kind, d);
            for idx in 0..(d as usize).pow(2 * k as u32) {
                let mut r = idx;
                let (mut x, mut z) = (vec![0i64; k], vec![0i64; k]);
                for i in 0..k {
                    x[i] = (r % d as usize) as i64;
                    r /= d as usize;
                    z[i] = (r % d as usize) as i64;
                    r /= d as usize;
                }
                let w = WeylOp::from_signed(d, &x, &z, 0)?;
                let img = conjugate_by_gate(&g, &w)?;
                let want = u.mul(&weyl_matrix(&w)?).mul(&u.adjoint());
                let dev = want.max_abs_diff(&weyl_matrix(&img)?);
                s.check(dev < 1e-9, || format!("d={d} {kind:?} on {w}: deviation {dev:e}"));
            }
        }
    }
    Ok(s)
}

fn decompositions() -> Suite {
    let mut s = Suite::new("encoder_decompositions");
    for g in QutritGate::NAMED {
        let dev = verify_decomposition(g);
        s.check(dev < 1e-10, || format!("{g}: deviation {dev:e}"));
    }
    s
}

fn random_weyl(rng: &mut ChaCha8Rng, n: usize) -> Result<WeylOp, CliError> {
    let x: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let z: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let w = WeylOp::from_signed(3, &x, &z, 0)?;
    Ok(if w.is_scalar() { WeylOp::z_on(3, n, 0)? } else { w })
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> CliffordGate {
    loop {
        let kind = GateKind::ALL[rng.gen_range(0..GateKind::ALL.len())];
        let a = rng.gen_range(0..n);
        if kind.arity() == 1 {
            return CliffordGate::one(kind, a);
        }
        if n < 2 {
            continue;
        }
        let b = (a + rng.gen_range(1..n)) % n;
        return CliffordGate::two(kind, a, b);
    }
}

/// Random qutrit circuit with interleaved measurements and feed-forward.
fn random_circuit(rng: &mut ChaCha8Rng, n: usize, depth: usize, max_meas: usize) -> Result<Circuit, CliError> {
    let mut c = Circuit::new(3, n)?;
    let mut slots: Vec<usize> = (0..rng.gen_range(1..=max_meas)).map(|_| rng.gen_range(0..=depth)).collect();
    slots.sort_unstable();
    let mut next = 0;
    for step in 0..=depth {
        while next < slots.len() && slots[next] == step {
            let r = c.measure(random_weyl(rng, n)?)?;
            if rng.gen_bool(0.3) {
                let branches = (0..3).map(|_| (0..rng.gen_range(0..2)).map(|_| random_gate(rng, n)).collect()).collect();
                c.cond(r, branches)?;
            }
            next += 1;
        }
        if step < depth {
            c.push_gate(random_gate(rng, n))?;
        }
    }
    Ok(c)
}

/// Tableau sampling against exact dense distributions: total variation distance
/// within ½ Σ 3σ of the per-outcome binomial errors.
fn sampling(count: usize, shots: usize, seed: u64, threads: usize) -> Result<Suite, CliError> {
    let mut s = Suite::new("tableau_vs_dense_sampling");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let n = 1 + i % 5;
        let c = random_circuit(&mut rng, n, 30, 4)?;
        let exact = circuit_distribution(&c)?;
        let counts = run_shots(&c, shots, seed.wrapping_add(i as u64), threads)?.joint_counts();
        let impossible = counts.keys().find(|k| !exact.contains_key(&((*k).clone(), false)));
        let bound: f64 =
            0.5 * exact.values().map(|&p| 3.0 * (p * (1.0 - p)).max(0.0).sqrt() / (shots as f64).sqrt()).sum::<f64>();
        let tvd: f64 = 0.5
            * exact
                .iter()
                .map(|((k, _), p)| (counts.get(k).copied().unwrap_or(0) as f64 / shots as f64 - p).abs())
                .sum::<f64>();
        s.check(impossible.is_none() && tvd <= bound + 1e-9, || {
            format!("circuit {i} ({n} qutrits): tvd {tvd:.4}, bound {bound:.4}, impossible {impossible:?}")
        });
    }
    Ok(s)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let threads = cfg.threads.unwrap_or_else(rayon::current_num_threads);
    let suites = [
        conjugation_tables()?,
        decompositions(),
        sampling(cfg.circuits.unwrap_or(20), cfg.shots.unwrap_or(2000), cfg.seed.unwrap_or(0), threads)?,
    ];
    let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
    let passed = failed.is_empty();
    let mut out = Outcome {
        preset: None,
        result: json!({ "passed": passed, "suites": serde_json::to_value(&suites).map_err(|e| CliError::Core(e.into()))? }),
        csv: None,
        failure: None,
    };
    out.csv = Some(csv_string(|w| {
        w.write_record(["suite", "status", "checked"])?;
        suites.iter().try_for_each(|s| w.write_record([s.name, if s.passed { "pass" } else { "fail" }, &s.checked.to_string()]))
    })?);
    if !passed {
        out.failure = Some(format!("suites failed: {}", failed.join(", ")));
    }
    Ok(out)
}
