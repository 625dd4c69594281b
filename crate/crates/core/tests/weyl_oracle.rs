//! Weyl arithmetic and conjugation tables checked against dense matrices.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z3tc::dense::{gate_matrix, weyl_matrix, CMatrix};
use z3tc::weyl::{conjugate_by_gate, symplectic_product};
use z3tc::{CliffordGate, GateKind, WeylOp};

fn local_gate(kind: GateKind) -> CliffordGate {
    if kind.arity() == 1 {
        CliffordGate::one(kind, 0)
    } else {
        CliffordGate::two(kind, 0, 1)
    }
}

fn omega_exact(d: u32, a: Complex64, b: Complex64) -> Option<u32> {
    (0..d).find(|&k| (a - z3tc::dense::omega(d, k as i64) * b).norm() < 1e-9)
}

#[test]
fn conjugation_tables_match_dense_exactly() {
    for d in [3u32, 5] {
        for kind in GateKind::ALL {
            let k = kind.arity();
            let u = gate_matrix(kind, d);
            let g = local_gate(kind);
            let count = (d as usize).pow(2 * k as u32);
            for idx in 0..count {
                let mut r = idx;
                let mut x = vec![0i64; k];
                let mut z = vec![0i64; k];
                for s in 0..k {
                    x[s] = (r % d as usize) as i64;
                    r /= d as usize;
                    z[s] = (r % d as usize) as i64;
                    r /= d as usize;
                }
                let w = WeylOp::from_signed(d, &x, &z, 0).unwrap();
                let img = conjugate_by_gate(&g, &w).unwrap();
                let want = u.mul(&weyl_matrix(&w).unwrap()).mul(&u.adjoint());
                let got = weyl_matrix(&img).unwrap();
                assert!(
                    want.max_abs_diff(&got) < 1e-9,
                    "d={d} {kind:?} on {w}: table gave {img}"
                );
            }
        }
    }
}

#[test]
fn named_conjugations() {
    let x = WeylOp::x_on(3, 1, 0).unwrap();
    let z = WeylOp::z_on(3, 1, 0).unwrap();
    let h = CliffordGate::one(GateKind::Fourier, 0);
    assert_eq!(conjugate_by_gate(&h, &x).unwrap(), z);
    assert_eq!(conjugate_by_gate(&h, &z).unwrap(), x.inverse());
    let c = CliffordGate::one(GateKind::Conj, 0);
    assert_eq!(conjugate_by_gate(&c, &z).unwrap(), z.inverse());
    let cx = CliffordGate::two(GateKind::CX, 0, 1);
    let zt = WeylOp::z_on(3, 2, 1).unwrap();
    let want = WeylOp::from_signed(3, &[0, 0], &[-1, 1], 0).unwrap();
    assert_eq!(conjugate_by_gate(&cx, &zt).unwrap(), want);
    let xc = WeylOp::x_on(3, 2, 0).unwrap();
    assert_eq!(conjugate_by_gate(&cx, &xc).unwrap(), WeylOp::from_signed(3, &[1, 1], &[0, 0], 0).unwrap());
    let cz = CliffordGate::two(GateKind::CZ, 0, 1);
    assert_eq!(conjugate_by_gate(&cz, &xc).unwrap(), WeylOp::from_signed(3, &[1, 0], &[0, 1], 0).unwrap());
}

#[test]
fn compose_and_inverse_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50 {
        let d = if i % 2 == 0 { 3 } else { 5 };
        let n = 1 + i % 4;
        let w = common::random_weyl(&mut rng, d, n);
        let prod = w.compose(&w.inverse()).unwrap();
        assert!(prod.is_identity());
        let m = weyl_matrix(&w).unwrap().mul(&weyl_matrix(&w.inverse()).unwrap());
        assert!(m.max_abs_diff(&CMatrix::identity(m.dim)) < 1e-9);
    }
}

#[test]
fn symplectic_product_matches_dense_commutator() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..200 {
        let d = if i % 3 == 0 { 5 } else { 3 };
        let n = 1 + i % 4;
        let a = common::random_weyl(&mut rng, d, n);
        let b = common::random_weyl(&mut rng, d, n);
        let s = symplectic_product(&a, &b).unwrap();
        let ab = a.compose(&b).unwrap();
        let ba = b.compose(&a).unwrap();
        assert_eq!(ab, ba.clone().times_omega(-(s as i64)));
        let (ma, mb) = (weyl_matrix(&a).unwrap(), weyl_matrix(&b).unwrap());
        let lhs = ma.mul(&mb);
        let rhs = mb.mul(&ma);
        let k = omega_exact(d, lhs.data.iter().copied().find(|v| v.norm() > 0.5).unwrap(),
            rhs.data[lhs.data.iter().position(|v| v.norm() > 0.5).unwrap()]).unwrap();
        assert_eq!(k, (d - s as u32) % d);
        assert!(weyl_matrix(&ab).unwrap().max_abs_diff(&lhs) < 1e-9);
    }
}

fn arb_weyl(d: u32, n: usize) -> impl Strategy<Value = WeylOp> {
    (
        proptest::collection::vec(0..d as i64, n),
        proptest::collection::vec(0..d as i64, n),
        0..d as i64,
    )
        .prop_map(move |(x, z, p)| WeylOp::from_signed(d, &x, &z, p).unwrap())
}

fn arb_gate(n: usize) -> impl Strategy<Value = CliffordGate> {
    (0..GateKind::ALL.len(), 0..n, 1..n).prop_map(move |(k, a, off)| {
        let kind = GateKind::ALL[k];
        if kind.arity() == 1 {
            CliffordGate::one(kind, a)
        } else {
            CliffordGate::two(kind, a, (a + off) % n)
        }
    })
}

proptest! {
    #[test]
    fn compose_is_associative(a in arb_weyl(5, 4), b in arb_weyl(5, 4), c in arb_weyl(5, 4)) {
        let l = a.compose(&b).unwrap().compose(&c).unwrap();
        let r = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(&l, &r);
        prop_assert!(l.phase() < 5);
        prop_assert!(l.x_exp().iter().chain(l.z_exp()).all(|&v| v < 5));
    }

    #[test]
    fn symplectic_antisymmetric_bilinear(a in arb_weyl(3, 5), b in arb_weyl(3, 5), c in arb_weyl(3, 5)) {
        let sab = symplectic_product(&a, &b).unwrap();
        let sba = symplectic_product(&b, &a).unwrap();
        prop_assert_eq!((sab + sba) % 3, 0);
        let bc = b.compose(&c).unwrap();
        let lhs = symplectic_product(&a, &bc).unwrap();
        let rhs = (sab + symplectic_product(&a, &c).unwrap()) % 3;
        prop_assert_eq!(lhs, rhs);
        let b2 = b.pow(2);
        prop_assert_eq!(symplectic_product(&a, &b2).unwrap(), (2 * sab) % 3);
    }

    #[test]
    fn conjugation_preserves_symplectic(w in arb_weyl(3, 4), v in arb_weyl(3, 4), g in arb_gate(4)) {
        let gw = conjugate_by_gate(&g, &w).unwrap();
        let gv = conjugate_by_gate(&g, &v).unwrap();
        prop_assert_eq!(symplectic_product(&gw, &gv).unwrap(), symplectic_product(&w, &v).unwrap());
        // conjugation is a homomorphism
        let prod = conjugate_by_gate(&g, &w.compose(&v).unwrap()).unwrap();
        prop_assert_eq!(prod, gw.compose(&gv).unwrap());
        // and the inverse gate undoes it
        prop_assert_eq!(conjugate_by_gate(&g.inverse(), &gw).unwrap(), w);
    }

    #[test]
    fn every_operator_has_unit_order(w in arb_weyl(7, 3)) {
        prop_assert!(w.pow(7).is_identity());
        prop_assert!(w.check_unit_order().is_ok());
    }
}
