//! Seeded random streams, sphere sampling and circle arc arithmetic.
//!
//! Every random consumer asks for a named substream so that results do not
//! depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub const TAU: f64 = 2.0 * PI;

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent generator for `(seed, label, index)`.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ fnv1a(label)));
    rng.set_stream(index);
    rng
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Uniform point on `S^{n-1}`.
pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut g = gaussian_vector(rng, n);
        let r = norm(&g);
        if r > 1e-300 {
            g.iter_mut().for_each(|x| *x /= r);
            return g;
        }
    }
}

/// First `k` columns of a Haar-distributed orthogonal `n × n` matrix.
///
/// Gram–Schmidt on independent Gaussian columns (QR with positive diagonal)
/// is exactly Haar on `O(n)`, and its leading columns are distributed as the
/// leading columns of the full matrix.
pub fn haar_frame<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<f64>> {
    assert!(k <= n);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut g = gaussian_vector(rng, n);
        for c in &cols {
            let p = dot(&g, c);
            g.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
        }
        let r = norm(&g);
        if r < 1e-10 {
            continue;
        }
        g.iter_mut().for_each(|x| *x /= r);
        cols.push(g);
    }
    cols
}

pub fn haar_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    haar_frame(rng, n, n)
}

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Length of the intersection of two circle arcs given as `(start, length)`,
/// lengths at most `2π`.
pub fn arc_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (s1, l1) = (wrap_angle(a.0), a.1.clamp(0.0, TAU));
    let (s2, l2) = (wrap_angle(b.0), b.1.clamp(0.0, TAU));
    let mut total = 0.0;
    for k in -1..=1 {
        let off = TAU * f64::from(k);
        let lo = s1.max(s2 + off);
        let hi = (s1 + l1).min(s2 + l2 + off);
        if hi > lo {
            total += hi - lo;
        }
    }
    total.min(l1.min(l2))
}

/// Normalized circular correlation `(1/2π) ∫ f(φ) f(φ + Δ) dφ` of a piecewise
/// constant function given as `(start, length, value)` arcs.
pub fn arc_correlation(arcs: &[(f64, f64, f64)], delta: f64) -> f64 {
    let mut s = 0.0;
    for &(a0, al, av) in arcs {
        for &(b0, bl, bv) in arcs {
            if av == 0.0 || bv == 0.0 {
                continue;
            }
            s += av * bv * arc_overlap((a0, al), (b0 - delta, bl));
        }
    }
    s / TAU
}

/// Angle of a point of `S^1` in `[0, 2π)`.
pub fn angle_of(x: &[f64]) -> f64 {
    wrap_angle(x[1].atan2(x[0]))
}
