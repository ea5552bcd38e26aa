use cutgap::cutpoly::{max_cut_exact, WeightedInstance};
use cutgap::gapbound::{pentagon_certificate, point_mass_certificate};
use cutgap::instances::{
    build_partition, embedding_value, estimate_az, hyperplane_rounding, nested_partitions, ratio_trend,
    sdp_rank_n_heuristic, InstanceOptions, RoundingMode, Sdp1Mode,
};
use cutgap::kernels::{alpha_gw, alpha2_closed_form, t_gw};
use cutgap::sampling::substream;
use proptest::prelude::*;
use rand::Rng;

fn random_instance(seed: u64, n: usize, density: f64) -> WeightedInstance {
    let mut rng = substream(seed, "instance", 0);
    let mut a = WeightedInstance::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < density {
                a.set(i, j, rng.gen::<f64>());
            }
        }
    }
    a
}

#[test]
fn goemans_williamson_sandwich() {
    let (agw, _) = alpha_gw();
    for s in 0..100u64 {
        let nv = 3 + (s as usize % 12);
        let a = random_instance(s, nv, 0.6);
        let rank = 2 + (s as usize % 4);
        let h = sdp_rank_n_heuristic(&a, rank, 4, 300, s).unwrap();
        let (exact, _) = max_cut_exact(&a).unwrap();
        assert!(exact >= agw * h.value - 1e-9, "seed {s}: {exact} < {agw}·{}", h.value);
        let e = hyperplane_rounding(&h.embedding, &a, RoundingMode::Expectation).unwrap();
        assert!(e >= agw * h.value - 1e-9 && e <= exact + 1e-9);
    }
}

#[test]
fn rank_one_heuristic_finds_max_cut() {
    for s in 0..20u64 {
        let nv = 4 + (s as usize % 9);
        let a = random_instance(100 + s, nv, 0.7);
        let h = sdp_rank_n_heuristic(&a, 1, 1 << nv, 100, s).unwrap();
        let (exact, _) = max_cut_exact(&a).unwrap();
        assert!((h.value - exact).abs() <= 1e-9, "seed {s}: {} vs {exact}", h.value);
    }
}

#[test]
fn circle_mass_is_exact() {
    let w = [(t_gw(), 0.7), (-0.2, 0.1), (0.5, 0.3)];
    for m in [3, 7, 16] {
        let az = estimate_az(&build_partition(2, m, 0).unwrap(), &w, 0, 0).unwrap();
        assert!((az.total_mass - 1.1).abs() <= 1e-12);
        assert!((az.instance.total() + az.removed_diagonal - az.total_mass).abs() <= 1e-12);
    }
}

#[test]
fn monte_carlo_hemispheres_within_three_sigma() {
    // antipodal cells are split by a hyperplane: pairs at angle θ straddle it with probability θ/π
    let p = build_partition(3, 2, 4).unwrap();
    let samples = 200_000;
    for t in [-0.6, 0.3, 0.8] {
        let az = estimate_az(&p, &[(t, 1.0)], samples, 9).unwrap();
        assert!((az.total_mass - 1.0).abs() <= 1e-12);
        let q = t.acos() / std::f64::consts::PI;
        let got = 2.0 * az.instance.weight(0, 1);
        let se = (q * (1.0 - q) / samples as f64).sqrt();
        assert!((got - q).abs() <= 3.0 * se, "t={t}: {got} vs {q}");
    }
}

#[test]
fn children_lie_in_parent_cells() {
    for n in [2, 3, 4] {
        let parts = nested_partitions(n, &[4, 9, 17], 3).unwrap();
        for w in parts.windows(2) {
            let parents = w[1].parents().unwrap();
            for (c, r) in w[1].representatives().iter().enumerate() {
                assert_eq!(w[0].locate(r), parents[c], "n={n}");
            }
        }
    }
}

#[test]
fn circle_trend_is_monotone() {
    let opts = InstanceOptions::default();
    let cert = point_mass_certificate(2, t_gw(), 500).unwrap();
    let rows = ratio_trend(&cert, &[4, 8, 12, 24], &opts, 2).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].sdp1 >= w[0].sdp1 - 1e-12 && w[1].sdpn >= w[0].sdpn - 1e-12, "{rows:?}");
    }
    assert!(rows.iter().all(|r| r.sdp1_mode == Sdp1Mode::Exact && r.ratio <= 1.0 + 1e-12));
}

#[test]
fn hemispheres_have_ratio_one() {
    let opts = InstanceOptions::default();
    let cert = pentagon_certificate(100);
    let r = cutgap::instances::instance_from_certificate(&cert, 2, &opts, 0).unwrap();
    assert!((r.ratio - 1.0).abs() <= 1e-12);
}

#[test]
fn pentagon_instance_attains_alpha2() {
    let opts = InstanceOptions::default();
    let r = cutgap::instances::instance_from_certificate(&pentagon_certificate(100), 5, &opts, 0).unwrap();
    assert!((r.ratio - alpha2_closed_form()).abs() <= 1e-9, "{}", r.ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ascent_never_decreases(seed in any::<u64>(), nv in 2usize..14, rank in 1usize..5) {
        let a = random_instance(seed, nv, 0.5);
        let h = sdp_rank_n_heuristic(&a, rank, 2, 200, seed).unwrap();
        prop_assert!(h.sweeps.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!((embedding_value(&a, &h.embedding) - h.value).abs() <= 1e-9);
        prop_assert!(h.embedding.vectors.iter().all(|v| (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn heuristic_monotone_in_rank(seed in any::<u64>(), nv in 3usize..12) {
        let a = random_instance(seed, nv, 0.6);
        let mut prev = 0.0;
        for rank in 1..=4 {
            let v = sdp_rank_n_heuristic(&a, rank, 3, 200, seed).unwrap().value;
            prop_assert!(v >= prev - 1e-12, "rank {}: {} < {}", rank, v, prev);
            prev = v;
        }
    }
}
