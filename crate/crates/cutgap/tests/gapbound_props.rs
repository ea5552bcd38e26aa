use cutgap::cutpoly::InequalityFamily;
use cutgap::gapbound::{
    bound_loop, pentagon_certificate, point_mass_certificate, solve_bound, tamper_certificate, verify_certificate,
    BoundOptions, DualCertificate, LoopConfig, SampleGrid, Tamper, VerifyOptions, GRID_TOP,
};
use cutgap::kernels::{alpha_gw, t_gw};
use proptest::prelude::*;
use std::sync::OnceLock;

fn small_config(n: usize, d: usize, rounds: usize) -> LoopConfig {
    let mut cfg = LoopConfig::new(n, d, vec![InequalityFamily::Triangle, InequalityFamily::Pentagonal], rounds, 7);
    cfg.grid = SampleGrid::uniform(201, -1.0, GRID_TOP).unwrap();
    cfg.bound.k_check = 1000;
    cfg
}

fn loop_certificate() -> &'static DualCertificate {
    static CERT: OnceLock<DualCertificate> = OnceLock::new();
    CERT.get_or_init(|| bound_loop(&small_config(3, 20, 4)).unwrap().certificate)
}

fn fast() -> VerifyOptions {
    VerifyOptions {
        digits: 30,
        k_check: Some(300),
    }
}

#[test]
fn empty_constraint_set_gives_one() {
    let r = bound_loop(&small_config(4, 10, 0)).unwrap();
    assert!((r.bound - 1.0).abs() < 1e-9);
    assert!(r.constraints.is_empty());
}

#[test]
fn finer_grid_never_raises_bound() {
    let coarse = SampleGrid::uniform(41, -1.0, GRID_TOP).unwrap();
    let mut pts = coarse.points().to_vec();
    pts.extend(SampleGrid::uniform(97, -0.999, 0.99).unwrap().points());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let fine = SampleGrid::new(pts).unwrap();
    let r = bound_loop(&small_config(3, 16, 3)).unwrap();
    let opts = BoundOptions::for_degree(16);
    let a = solve_bound(3, 16, &coarse, &r.constraints, &opts).unwrap().alpha;
    let b = solve_bound(3, 16, &fine, &r.constraints, &opts).unwrap().alpha;
    assert!(b <= a + 1e-9, "{b} > {a}");
}

#[test]
fn dual_objective_matches_primal() {
    let r = bound_loop(&small_config(3, 20, 3)).unwrap();
    let s = solve_bound(3, 20, &small_config(3, 20, 3).grid, &r.constraints, &BoundOptions::for_degree(20)).unwrap();
    assert!((s.certificate.alpha - s.alpha).abs() <= 1e-8, "{} vs {}", s.certificate.alpha, s.alpha);
    assert!((s.certificate.objective() - s.certificate.alpha).abs() <= 1e-15);
}

#[test]
fn bounds_stay_above_goemans_williamson() {
    let (agw, _) = alpha_gw();
    for n in 3..=5 {
        let r = bound_loop(&small_config(n, 20, 4)).unwrap();
        assert!(r.bound >= agw - 1e-6, "n={n}: {}", r.bound);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-9), "n={n}: {:?}", r.history);
    }
}

#[test]
fn circle_triangle_bound_below_one() {
    let mut cfg = small_config(2, 30, 3);
    cfg.families = vec![InequalityFamily::Triangle];
    let r = bound_loop(&cfg).unwrap();
    assert!(r.bound < 1.0 - 1e-3, "{}", r.bound);
}

#[test]
fn json_round_trip_verifies_identically() {
    for cert in [loop_certificate().clone(), pentagon_certificate(500), point_mass_certificate(4, t_gw(), 500).unwrap()] {
        let back = DualCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        let a = verify_certificate(&cert, &fast()).unwrap().verified_bound;
        let b = verify_certificate(&back, &fast()).unwrap().verified_bound;
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a - cert.alpha <= 1e-6);
    }
}

#[test]
fn verification_matches_in_float_and_high_precision() {
    let cert = loop_certificate();
    let hp = verify_certificate(cert, &fast()).unwrap().verified_bound;
    let fl = verify_certificate(cert, &VerifyOptions { digits: 0, k_check: Some(300) }).unwrap().verified_bound;
    assert!(fl >= hp - 1e-12 && fl - hp <= 1e-7, "{fl} vs {hp}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tampering_fails_at_the_expected_step(kind in 0usize..6, seed in any::<u64>()) {
        let kind = Tamper::ALL[kind];
        let bad = tamper_certificate(loop_certificate(), kind, seed).unwrap();
        let err = verify_certificate(&bad, &fast()).unwrap_err();
        prop_assert_eq!(err.step, kind.expected_step(), "{}", err);
    }
}
