#![allow(dead_code)]

use rand::Rng;
use z3tc::circuit::Circuit;
use z3tc::{CliffordGate, GateKind, WeylOp};

pub fn random_weyl<R: Rng>(rng: &mut R, d: u32, n: usize) -> WeylOp {
    let x: Vec<i64> = (0..n).map(|_| rng.gen_range(0..d as i64)).collect();
    let z: Vec<i64> = (0..n).map(|_| rng.gen_range(0..d as i64)).collect();
    WeylOp::from_signed(d, &x, &z, rng.gen_range(0..d as i64)).unwrap()
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> CliffordGate {
    loop {
        let kind = GateKind::ALL[rng.gen_range(0..GateKind::ALL.len())];
        if kind.arity() == 2 && n < 2 {
            continue;
        }
        let a = rng.gen_range(0..n);
        if kind.arity() == 1 {
            return CliffordGate::one(kind, a);
        }
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        return CliffordGate::two(kind, a, b);
    }
}

/// Random circuit with `depth` gates and up to `max_meas` interleaved measurements,
/// some followed by feed-forward.
pub fn random_circuit<R: Rng>(rng: &mut R, d: u32, n: usize, depth: usize, max_meas: usize) -> Circuit {
    let mut c = Circuit::new(d, n).unwrap();
    let n_meas = rng.gen_range(1..=max_meas);
    let mut slots: Vec<usize> = (0..n_meas).map(|_| rng.gen_range(0..=depth)).collect();
    slots.sort_unstable();
    let mut next = 0;
    for step in 0..=depth {
        while next < slots.len() && slots[next] == step {
            let mut w = random_weyl(rng, d, n);
            if w.is_scalar() {
                w = WeylOp::z_on(d, n, 0).unwrap();
            }
            let r = c.measure(w.with_phase(0)).unwrap();
            if rng.gen_bool(0.3) {
                let branches = (0..d).map(|_| (0..rng.gen_range(0..2)).map(|_| random_gate(rng, n)).collect()).collect();
                c.cond(r, branches).unwrap();
            }
            next += 1;
        }
        if step < depth {
            c.push_gate(random_gate(rng, n)).unwrap();
        }
    }
    c
}
