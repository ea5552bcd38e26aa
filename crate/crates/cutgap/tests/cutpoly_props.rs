use cutgap::cutpoly::*;
use proptest::prelude::*;

fn instance(n: usize, w: &[f64]) -> WeightedInstance {
    let mut g = WeightedInstance::empty(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            g.set(i, j, w[k % w.len()]);
            k += 1;
        }
    }
    g
}

#[test]
fn every_cut_matrix_is_a_member_with_unit_weight() {
    for m in 1..=5 {
        for (k, c) in enumerate_cut_matrices(m).unwrap().iter().enumerate() {
            match membership_lp(&c.to_dense(), m).unwrap() {
                Membership::Member { weights, residual } => {
                    assert!(residual <= 1e-9);
                    assert_eq!(weights.len(), 1, "m={m} k={k}");
                    assert_eq!(weights[0].0, k);
                    assert!((weights[0].1 - 1.0).abs() < 1e-9);
                }
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn hypermetric_small_vectors_are_valid() {
    // all vectors with entries in {±1, ±2}, odd sum, length 3..=7 up to sorting
    fn rec(prefix: &mut Vec<i64>, len: usize, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for v in [-2, -1, 1, 2] {
            if prefix.last().is_none_or(|&l| v >= l) {
                prefix.push(v);
                rec(prefix, len, out);
                prefix.pop();
            }
        }
    }
    for len in 1..=7 {
        let mut all = Vec::new();
        rec(&mut Vec::new(), len, &mut all);
        for b in all.iter().filter(|b| b.iter().sum::<i64>() % 2 != 0) {
            let ineq = hypermetric_inequality(b).unwrap();
            let (ok, worst) = validate_inequality(&ineq).unwrap();
            assert!(ok, "b={b:?} worst={worst} beta={}", ineq.beta);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convex_combinations_roundtrip(m in 2usize..6, raw in proptest::collection::vec(0.0f64..1.0, 16)) {
        let cuts = enumerate_cut_matrices(m).unwrap();
        let w: Vec<f64> = cuts.iter().enumerate().map(|(k, _)| raw[k % raw.len()] + 1e-3).collect();
        let s: f64 = w.iter().sum();
        let mut mat = vec![0.0; m * m];
        for (c, wk) in cuts.iter().zip(&w) {
            for (e, v) in mat.iter_mut().zip(c.to_dense()) {
                *e += wk / s * v;
            }
        }
        for i in 0..m { mat[i * m + i] = 1.0; }
        let res = membership_lp(&mat, m).unwrap();
        prop_assert!(res.is_member(), "{:?}", res);
    }

    #[test]
    fn exact_max_cut_matches_enumeration(n in 2usize..=10, w in proptest::collection::vec(0.0f64..5.0, 45)) {
        let g = instance(n, &w);
        let (v, f) = max_cut_exact(&g).unwrap();
        let mut best = 0.0f64;
        for c in enumerate_cut_matrices(n).unwrap() {
            let x = c.to_dense();
            let val: f64 = g.dense().iter().zip(&x).map(|(a, x)| a * (1.0 - x)).sum();
            best = best.max(val);
        }
        prop_assert!((v - best).abs() <= 1e-9 * (1.0 + best));
        prop_assert!((cut_value(&g, &f) - v).abs() <= 1e-12 * (1.0 + v));
    }

    #[test]
    fn scaling_scales_the_value(n in 2usize..=9, w in proptest::collection::vec(0.0f64..5.0, 36), c in 0.1f64..10.0) {
        let g = instance(n, &w);
        let (v, f) = max_cut_exact(&g).unwrap();
        let (vs, fs) = max_cut_exact(&g.scaled(c)).unwrap();
        prop_assert!((vs - c * v).abs() <= 1e-9 * (1.0 + vs));
        // each argmax stays optimal for the other problem
        prop_assert!((cut_value(&g, &fs) - v).abs() <= 1e-9 * (1.0 + v));
        prop_assert!((cut_value(&g.scaled(c), &f) - vs).abs() <= 1e-9 * (1.0 + vs));
    }

    #[test]
    fn nonmembers_get_valid_separators(m in 3usize..6, t in -0.99f64..-0.5) {
        // all off-diagonal entries t < −1/(m−1) violate Σ X_ij ≥ −⌊m/2⌋ or a triangle
        let mut mat = vec![t; m * m];
        for i in 0..m { mat[i * m + i] = 1.0; }
        let lower = -((m / 2) as f64);
        let pairs = (m * (m - 1) / 2) as f64;
        prop_assume!(pairs * t < lower - 1e-6);
        match membership_lp(&mat, m).unwrap() {
            Membership::Separated { inequality, value_at_m } => {
                prop_assert!(value_at_m < inequality.beta);
                prop_assert!(validate_inequality(&inequality).unwrap().0);
            }
            other => prop_assert!(false, "expected separation, got {:?}", other),
        }
    }
}
