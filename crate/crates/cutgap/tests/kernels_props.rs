use cutgap::cutpoly::membership_lp;
use cutgap::kernels::{
    avidor_zwick_mix, best_single_degree, gw_kernel, min_eigenvalue, reynolds_estimate, sampled_matrix, t_gw,
    windmill_reynolds, windmill_sign, InvariantKernel, SignFunction,
};
use cutgap::sampling::{random_unit, substream};
use proptest::prelude::*;

fn grid21() -> Vec<f64> {
    (0..=20).map(|i| -1.0 + i as f64 / 10.0).collect()
}

fn within_3_sigma(f: &SignFunction, exact: impl Fn(f64) -> f64, seed: u64) {
    for (i, t) in grid21().into_iter().enumerate() {
        let e = reynolds_estimate(f, t, 1_000_000, seed + i as u64).unwrap();
        let want = exact(t);
        let tol = 3.0 * e.std_error + 1e-12;
        assert!((e.estimate - want).abs() <= tol, "t={t}: {} vs {want} (se {})", e.estimate, e.std_error);
    }
}

#[test]
fn monte_carlo_matches_grothendieck_on_s2() {
    within_3_sigma(&SignFunction::gw(3), |t| gw_kernel(t).unwrap(), 100);
}

#[test]
fn monte_carlo_matches_windmill_closed_form() {
    within_3_sigma(&windmill_sign(), |t| windmill_reynolds(4, t).unwrap(), 200);
}

#[test]
fn monte_carlo_constant_is_exact() {
    let f = SignFunction::Constant { n: 5, sign: 1 };
    for t in grid21() {
        let e = reynolds_estimate(&f, t, 1000, 3).unwrap();
        assert_eq!(e.estimate, 1.0);
    }
}

#[test]
fn grothendieck_samples_are_cut_members() {
    let mut rng = substream(11, "gw-membership", 0);
    for _ in 0..50 {
        let pts: Vec<Vec<f64>> = (0..5).map(|_| random_unit(&mut rng, 3)).collect();
        let m = sampled_matrix(|t| gw_kernel(t).unwrap(), &pts);
        assert!(membership_lp(&m, 5).unwrap().is_member());
    }
}

#[test]
fn mixed_kernel_respects_alpha_on_fine_grid() {
    let r = avidor_zwick_mix(2000);
    for i in 0..10_000 {
        let t = -1.0 + 2.0 * i as f64 / 10_000.0;
        assert!(1.0 - r.kernel.eval(t) >= (r.alpha - 1e-6) * (1.0 - t), "t={t}");
    }
}

#[test]
fn single_degree_argmin_stable_in_kmax() {
    let t = t_gw();
    for n in 2..=20 {
        let k50 = best_single_degree(n, t, 50).unwrap().0;
        for kmax in 51..=200 {
            assert_eq!(best_single_degree(n, t, kmax).unwrap().0, k50, "n={n} kmax={kmax}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_normalized_and_psd(
        n in 2usize..9,
        raw in prop::collection::vec(0.0f64..1.0, 1..20),
        m in 1usize..7,
        seed in any::<u64>(),
    ) {
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 1e-6);
        let coeffs: Vec<f64> = raw.iter().map(|a| a / s).collect();
        let k = InvariantKernel::new(n, coeffs).unwrap();
        prop_assert!((k.eval(1.0).unwrap() - 1.0).abs() <= 1e-12);
        let mut rng = substream(seed, "psd", 0);
        let pts: Vec<Vec<f64>> = (0..m).map(|_| random_unit(&mut rng, n)).collect();
        let g = k.gram(&pts).unwrap();
        prop_assert!(min_eigenvalue(&g, m) >= -1e-9);
    }

    #[test]
    fn kernel_values_bounded(n in 2usize..9, k in 0usize..40, t in -1.0f64..1.0) {
        let v = InvariantKernel::single_degree(n, k).unwrap().eval(t).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }
}
