use cutgap::jacobi::{
    delta_threshold, envelope_poly, integral_representation, integrate, interior_decay_bound, JacobiBasis,
};
use proptest::prelude::*;

const NUS: [f64; 5] = [-0.5, 0.0, 0.5, 1.0, 2.5];

#[test]
fn normalized_at_one_up_to_500() {
    for &nu in &NUS {
        let b = JacobiBasis::new(nu).unwrap();
        let p = b.eval_all(500, 1.0).unwrap();
        for (k, v) in p.iter().enumerate() {
            assert!((v - 1.0).abs() <= 1e-12, "nu={nu} k={k} P_k(1)={v}");
        }
    }
}

#[test]
fn bounded_by_one_on_grid() {
    for &nu in &NUS {
        let b = JacobiBasis::new(nu).unwrap();
        for i in 0..=1000 {
            let t = -1.0 + i as f64 / 500.0;
            for v in b.eval_all(200, t).unwrap() {
                assert!(v.abs() <= 1.0 + 1e-12, "nu={nu} t={t} value {v}");
            }
        }
    }
}

#[test]
fn orthogonal_under_the_sphere_weight() {
    for &nu in &NUS {
        let b = JacobiBasis::new(nu).unwrap();
        let w = |th: f64| th.sin().powf(2.0 * nu + 1.0);
        let inner = |j: usize, k: usize| {
            integrate(
                |th: f64| b.eval(j, th.cos()).unwrap() * b.eval(k, th.cos()).unwrap() * w(th),
                0.0,
                std::f64::consts::PI,
                256,
            )
        };
        for j in 0..12 {
            let njj = inner(j, j);
            for k in (j + 1)..12 {
                let njk = inner(j, k);
                let nkk = inner(k, k);
                assert!(njk.abs() <= 1e-10 * (njj * nkk).sqrt(), "nu={nu} ({j},{k}) -> {njk}");
            }
        }
    }
}

#[test]
fn recurrence_agrees_with_integral_representation() {
    for &nu in &[0.0, 0.5, 1.0, 2.5] {
        let b = JacobiBasis::new(nu).unwrap();
        for k in 0..=10 {
            for i in 0..=20 {
                let theta = std::f64::consts::PI * i as f64 / 20.0;
                let want = integral_representation(nu, k, theta, 512).unwrap();
                let got = b.eval(k, theta.cos()).unwrap();
                assert!((want - got).abs() <= 1e-6, "nu={nu} k={k} theta={theta}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn envelope_dominates_and_sits_below_identity() {
    for n in 3..=10 {
        let b = JacobiBasis::for_dimension(n).unwrap();
        let q = envelope_poly(n).unwrap();
        let kmin = if n == 3 { 4 } else { 2 };
        for i in 0..=2000 {
            let t = -1.0 + i as f64 / 1000.0;
            let p = b.eval_all(50, t).unwrap();
            for (k, v) in p.iter().enumerate().skip(kmin) {
                assert!(v.abs() <= q.eval(t) + 1e-12, "n={n} k={k} t={t}");
            }
        }
        let d = delta_threshold(n).unwrap().value();
        for i in 0..=1000 {
            let t = 1.0 - d + d * i as f64 / 1000.0;
            assert!(q.eval(t) <= t + 1e-12, "n={n} t={t} q={}", q.eval(t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decay_bound_dominates(nu_i in 0usize..6, k in 1usize..400, t in -0.999f64..0.999) {
        let nu = nu_i as f64 * 0.5;
        let b = JacobiBasis::new(nu).unwrap();
        let v = b.eval(k, t).unwrap();
        prop_assert!(v.abs() <= interior_decay_bound(nu, k, t) + 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference(nu_i in 0usize..5, k in 1usize..30, t in -0.95f64..0.95) {
        let nu = NUS[nu_i];
        let b = JacobiBasis::new(nu).unwrap();
        let (_, d) = b.eval_all_with_derivative(k, t).unwrap();
        let h = 1e-6;
        let fd = (b.eval(k, t + h).unwrap() - b.eval(k, t - h).unwrap()) / (2.0 * h);
        prop_assert!((d[k] - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn parity(nu_i in 0usize..5, k in 0usize..60, t in -1.0f64..1.0) {
        let b = JacobiBasis::new(NUS[nu_i]).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((b.eval(k, -t).unwrap() - sign * b.eval(k, t).unwrap()).abs() <= 1e-12);
    }
}
