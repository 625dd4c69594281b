use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use z3tc::analysis::*;
use z3tc::encoder::{with_hardware_noise, HardwareNoise, MeasureBasis};
use z3tc::toric::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn ground_state_bounds_match_quoted_values() {
    let b = fidelity_bounds(0.75, 0.68, 24).unwrap();
    assert!(close(b.lower, 0.43, 1e-12) && close(b.upper, 0.68, 1e-12));
    assert!(close(b.per_site_lower, 0.965, 5e-4), "{}", b.per_site_lower);
    assert!(close(b.per_site_upper, 0.984, 5e-4), "{}", b.per_site_upper);
    assert!(close(b.per_site_lower, 0.9654, 5e-5) && close(b.per_site_upper, 0.9841, 5e-5));
}

#[test]
fn bound_edge_cases() {
    let b = fidelity_bounds(1.0, 1.0, 7).unwrap();
    assert_eq!((b.lower, b.upper, b.per_site_lower, b.per_site_upper), (1.0, 1.0, 1.0, 1.0));
    let b = fidelity_bounds(0.5, 0.4, 10).unwrap();
    assert_eq!((b.lower, b.upper, b.per_site_lower), (0.0, 0.4, 0.0));
    let b = fidelity_bounds(1.02, 0.9, 2).unwrap();
    assert!(b.clamped && close(b.upper, 0.9, 1e-12));
    assert!(fidelity_bounds(0.5, 0.5, 0).is_err());
}

#[test]
fn bound_errors_propagate() {
    let b = fidelity_bounds_with_errors(0.75, 0.03, 0.68, 0.03, 24).unwrap();
    let se = b.se.unwrap();
    assert!(close(se.lower, 0.03 * 2f64.sqrt(), 1e-12) && close(se.upper, 0.03, 1e-12));
    // first-order error of the root against a finite difference
    let h = 1e-6;
    let fd = (fidelity_bounds(0.75 + h, 0.68, 24).unwrap().per_site_lower - b.per_site_lower) / h;
    assert!(close(se.per_site_lower, fd * se.lower, 1e-6));
}

#[test]
fn qutrit_bounds() {
    let b = topological_qutrit_bounds([0.92, 0.05, 0.03], [0.80, 0.1, 0.1], 0).unwrap();
    assert!(close(b.lower, 0.72, 1e-12) && close(b.upper, 0.80, 1e-12));
    let b = topological_qutrit_bounds([0.0, 1.0, 0.0], [1.0, 0.0, 0.0], 1).unwrap();
    assert_eq!((b.lower, b.upper), (1.0, 1.0));
    assert!(topological_qutrit_bounds([1.0; 3], [1.0; 3], 3).is_err());
    for layout in [QutritLayout::six_by_four(), QutritLayout::six_by_two()] {
        let q = TopologicalQutrit::build(layout).unwrap();
        for s in q.ideal().unwrap() {
            let b = topological_qutrit_bounds(s.charge_loop, s.flux_loop, s.outcome as usize).unwrap();
            assert!(close(b.lower, 1.0, 1e-9) && close(b.upper, 1.0, 1e-9));
        }
    }
}

proptest! {
    #[test]
    fn bounds_are_monotone(p in 0.0f64..1.0, q in 0.0f64..1.0, dp in 0.0f64..0.2, n in 1usize..40) {
        let a = fidelity_bounds(p, q, n).unwrap();
        let b = fidelity_bounds((p + dp).min(1.0), q, n).unwrap();
        let c = fidelity_bounds(p, (q + dp).min(1.0), n).unwrap();
        prop_assert!(a.lower <= a.upper);
        for x in [&b, &c] {
            prop_assert!(x.lower >= a.lower && x.upper >= a.upper);
            prop_assert!(x.per_site_lower >= a.per_site_lower && x.per_site_upper >= a.per_site_upper);
        }
    }

    #[test]
    fn mitigation_inverts_product_noise(seed in any::<u64>(), width in 1usize..9, p01 in 0.0f64..0.2, p10 in 0.0f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dist: Vec<f64> = (0..1 << width).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|p| *p /= total);
        let cm = ConfusionMatrix::new(p01, p10).unwrap();
        let noisy = apply_confusion(&dist, width, &cm).unwrap();
        let back = spam_mitigate(&noisy, width, &cm).unwrap();
        for (a, b) in back.probs.iter().zip(&dist) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn mitigation_round_trip_at_calibrated_rates() {
    let cm = ConfusionMatrix::calibrated();
    let dist: Vec<f64> = (0..256).map(|i| ((i * 37) % 101) as f64).collect();
    let total: f64 = dist.iter().sum();
    let dist: Vec<f64> = dist.iter().map(|p| p / total).collect();
    let back = spam_mitigate(&apply_confusion(&dist, 8, &cm).unwrap(), 8, &cm).unwrap();
    assert!(back.probs.iter().zip(&dist).all(|(a, b)| (a - b).abs() < 1e-12));
    let same = spam_mitigate(&dist, 8, &ConfusionMatrix::ideal()).unwrap();
    assert_eq!(same.probs, dist);
}

#[test]
fn mitigation_flags_negatives_and_rejects_singular() {
    let cm = ConfusionMatrix::calibrated();
    let m = spam_mitigate(&[1.0, 0.0, 0.0, 0.0], 2, &cm).unwrap();
    assert!(m.has_negative && m.min < 0.0);
    assert!((m.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let singular = ConfusionMatrix { p01: 0.6, p10: 0.4 };
    assert!(spam_mitigate(&[0.5, 0.5], 1, &singular).is_err());
    assert!(ConfusionMatrix::new(0.5, 0.1).is_err());
    assert!(spam_mitigate(&[1.0, 0.0, 0.0], 2, &cm).is_err());
}

fn ideal_frame(lx: usize, ly: usize) -> (TorusLattice, Frame) {
    let l = TorusLattice::new(lx, ly).unwrap();
    let mut e = Experiment::new(l.clone()).unwrap();
    e.prepare().unwrap();
    e.snapshot("ground").unwrap();
    let frames = e.run_noiseless(0).unwrap();
    (l, frames.last().unwrap().clone())
}

#[test]
fn energy_density_cases() {
    let (l, f) = ideal_frame(6, 4);
    assert!(close(energy_density(&f.snapshots, &l).unwrap(), -1.0, 1e-12));
    let mut third = f.snapshots.clone();
    third.iter_mut().for_each(|s| s.projectors = vec![1.0 / 3.0; 3]);
    assert!(close(energy_density(&third, &l).unwrap(), -1.0 / 3.0, 1e-12));
    let mut shuffled = third.clone();
    shuffled.reverse();
    assert_eq!(energy_density(&shuffled, &l).unwrap(), energy_density(&third, &l).unwrap());
    assert!(energy_density(&f.snapshots[1..], &l).is_err());
    assert!(close(energy_from_values(&[0.945; 24]).unwrap(), -0.945, 1e-12));
}

#[test]
fn standard_error_cases() {
    assert!(close(binomial_se(0.5, 517).unwrap(), 0.0220, 5e-5));
    assert_eq!(binomial_se(0.0, 100).unwrap(), 0.0);
    assert_eq!(binomial_se(1.0, 100).unwrap(), 0.0);
    assert!(binomial_se(0.5, 0).is_err());
    let (se, max) = standard_errors(&[(10, 100), (50, 100), (517, 517)]).unwrap();
    assert_eq!(se.len(), 3);
    assert!(close(max, 0.05, 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [0.2, 0.5, 0.9] {
        let samples: Vec<bool> = (0..517).map(|_| rng.gen_bool(p)).collect();
        let phat = samples.iter().filter(|&&b| b).count() as f64 / 517.0;
        let boot = bootstrap_se(&samples, 1000, 17).unwrap();
        let analytic = binomial_se(phat, 517).unwrap();
        assert!((boot / analytic - 1.0).abs() < 0.1, "{boot} vs {analytic}");
    }
}

#[test]
fn ideal_logical_values() {
    for (lx, ly) in [(6, 4), (4, 4), (6, 2)] {
        let l = TorusLattice::new(lx, ly).unwrap();
        let mut e = Experiment::new(l.clone()).unwrap();
        e.prepare().unwrap();
        let v = logical_values(&l, e.state().unwrap()).unwrap();
        assert!(close(v.z_hori, 1.0, 1e-12) && close(v.z_vert, 1.0, 1e-12));
        assert!(close(v.x_hori, 1.0 / 3.0, 1e-12) && close(v.x_vert, 1.0 / 3.0, 1e-12));
    }
}

#[test]
fn noiseless_sampling_is_exact() {
    let l = TorusLattice::new(4, 2).unwrap();
    let c = default_ground_state(&l).unwrap();
    let cm = ConfusionMatrix::ideal();
    let z = sample_measure_all(&c, MeasureBasis::Z, 300, 1, &cm, 1).unwrap();
    let x = sample_measure_all(&c, MeasureBasis::X, 300, 2, &cm, 1).unwrap();
    let s = sampled_plaquettes(&l, &z, &x, &cm).unwrap();
    assert_eq!(s.discard_fraction, 0.0);
    assert!(s.pi1.iter().chain(&s.pi1_mitigated).all(|&v| close(v, 1.0, 1e-12)));
    assert!(close(s.energy, -1.0, 1e-12));
    let v = sampled_logical_values(&l, &z, &x, Some(&cm)).unwrap();
    assert_eq!((v.z_hori, v.z_vert), (1.0, 1.0));
    // X strings are uniformly random: 1/3 within 4σ of 300 shots
    let tol = 4.0 * (2.0f64 / 9.0 / 300.0).sqrt();
    assert!(close(v.x_hori, 1.0 / 3.0, tol) && close(v.x_vert, 1.0 / 3.0, tol), "{v:?}");
    // a mixed operator has no outcome in a single basis
    let a = l.op(l.plaquettes_of(PlaquetteType::A).next().unwrap());
    assert!(z.pi1(&a).is_err());
}

#[test]
fn mitigation_raises_noisy_4x4_estimates() {
    let l = TorusLattice::new(4, 4).unwrap();
    let noisy = with_hardware_noise(&default_ground_state(&l).unwrap(), &HardwareNoise::default()).unwrap();
    let cm = ConfusionMatrix::calibrated();
    let z = sample_measure_all(&noisy, MeasureBasis::Z, 4000, 11, &cm, 1).unwrap();
    let x = sample_measure_all(&noisy, MeasureBasis::X, 4000, 12, &cm, 1).unwrap();
    let s = sampled_plaquettes(&l, &z, &x, &cm).unwrap();
    for (i, (raw, m)) in s.pi1.iter().zip(&s.pi1_mitigated).enumerate() {
        assert!(m > raw, "{}: {raw} -> {m}", s.labels[i]);
    }
    assert!(s.energy_mitigated < s.energy);
}

#[test]
fn csv_tables() {
    let q = TopologicalQutrit::build(QutritLayout::six_by_two()).unwrap();
    let t = qutrit_table_csv(&q.ideal().unwrap()).unwrap();
    let lines: Vec<&str> = t.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("outcome,shots,charge_0"));
    assert!(lines[1].ends_with("1.000000,1.000000"));
    let p = plaquette_table_csv(&["A(0,0)".into()], &[0.9], Some(&[0.95])).unwrap();
    assert_eq!(p, "plaquette,pi1,pi1_mitigated\n\"A(0,0)\",0.900000,0.950000\n");
    assert!(plaquette_table_csv(&["A(0,0)".into()], &[], None).is_err());
    let (_, f) = ideal_frame(4, 2);
    assert_eq!(frames_csv(&[f]).unwrap().lines().count(), 9);
    let b = bounds_csv(&[fidelity_bounds(0.75, 0.68, 24).unwrap()]).unwrap();
    assert!(b.contains("0.430000,0.680000"));
}
