//! Symmetric Jacobi polynomials `P_k^(ν,ν)` normalized so that `P_k(1) = 1`.
//!
//! With this normalization the three-term recurrence reads
//!
//! ```text
//! P_{k+1}(t) = (2k+2ν+1)/(k+2ν+1) · t · P_k(t) − k/(k+2ν+1) · P_{k−1}(t)
//! ```
//!
//! which never leaves `[-1, 1]` for `ν ≥ −1/2`, so no rescaling by the value
//! at one is needed. For `ν = −1/2` this is the Chebyshev recurrence.

use crate::arith::{round_down, Arith};
use num_rational::Rational64;
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

pub const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JacobiError {
    #[error("parameter nu = {0} must exceed -1")]
    BadNu(f64),
    #[error("argument t = {0} outside [-1, 1]")]
    Domain(f64),
    #[error("sphere dimension {0} not supported here")]
    BadDimension(usize),
    #[error("quadrature needs at least 16 points, got {0}")]
    TooFewPoints(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiBasis {
    nu: f64,
}

impl JacobiBasis {
    pub fn new(nu: f64) -> Result<Self, JacobiError> {
        if !(nu > -1.0) || !nu.is_finite() {
            return Err(JacobiError::BadNu(nu));
        }
        Ok(JacobiBasis { nu })
    }

    /// Basis attached to the sphere `S^{n-1}`: `ν = (n − 3)/2`.
    pub fn for_dimension(n: usize) -> Result<Self, JacobiError> {
        if n < 2 {
            return Err(JacobiError::BadDimension(n));
        }
        Self::new((n as f64 - 3.0) / 2.0)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Recurrence coefficients `(a_k, b_k)` with `P_{k+1} = a_k t P_k − b_k P_{k−1}`.
    /// Only meaningful for `k ≥ 1`; `P_1 = t` is set directly.
    pub fn coefficients(&self, k: usize) -> (f64, f64) {
        let k = k as f64;
        let den = k + 2.0 * self.nu + 1.0;
        ((2.0 * k + 2.0 * self.nu + 1.0) / den, k / den)
    }

    fn check(&self, t: f64) -> Result<f64, JacobiError> {
        if !t.is_finite() || t.abs() > 1.0 + DOMAIN_TOL {
            return Err(JacobiError::Domain(t));
        }
        Ok(t.clamp(-1.0, 1.0))
    }

    pub fn eval(&self, k: usize, t: f64) -> Result<f64, JacobiError> {
        let t = self.check(t)?;
        let mut prev = 1.0;
        if k == 0 {
            return Ok(prev);
        }
        let mut cur = t;
        for j in 1..k {
            let (a, b) = self.coefficients(j);
            let next = a * t * cur - b * prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    pub fn eval_all(&self, kmax: usize, t: f64) -> Result<Vec<f64>, JacobiError> {
        let t = self.check(t)?;
        let mut out = Vec::with_capacity(kmax + 1);
        out.push(1.0);
        if kmax >= 1 {
            out.push(t);
        }
        for j in 1..kmax {
            let (a, b) = self.coefficients(j);
            out.push(a * t * out[j] - b * out[j - 1]);
        }
        Ok(out)
    }

    /// Values and first derivatives for degrees `0..=kmax`.
    pub fn eval_all_with_derivative(
        &self,
        kmax: usize,
        t: f64,
    ) -> Result<(Vec<f64>, Vec<f64>), JacobiError> {
        let t = self.check(t)?;
        let mut p = vec![1.0];
        let mut dp = vec![0.0];
        if kmax >= 1 {
            p.push(t);
            dp.push(1.0);
        }
        for j in 1..kmax {
            let (a, b) = self.coefficients(j);
            p.push(a * t * p[j] - b * p[j - 1]);
            dp.push(a * (p[j] + t * dp[j]) - b * dp[j - 1]);
        }
        Ok((p, dp))
    }

    /// Recurrence coefficients in an arbitrary arithmetic context.
    ///
    /// When `2ν` is an integer (every sphere dimension) the coefficients are
    /// ratios of small integers and are computed to full working precision.
    pub fn table<A: Arith>(&self, ctx: &A, kmax: usize) -> RecurrenceTable<A> {
        let two_nu = 2.0 * self.nu;
        let integral = (two_nu - two_nu.round()).abs() == 0.0;
        let mut a = Vec::with_capacity(kmax);
        let mut b = Vec::with_capacity(kmax);
        for k in 0..kmax {
            let kf = k as f64;
            if integral {
                a.push(ctx.ratio(2.0 * kf + two_nu + 1.0, kf + two_nu + 1.0));
                b.push(ctx.ratio(kf, kf + two_nu + 1.0));
            } else {
                let (x, y) = self.coefficients(k);
                a.push(ctx.from_f64(x));
                b.push(ctx.from_f64(y));
            }
        }
        RecurrenceTable { a, b }
    }
}

/// Precomputed recurrence coefficients for repeated evaluation.
pub struct RecurrenceTable<A: Arith> {
    a: Vec<A::R>,
    b: Vec<A::R>,
}

impl<A: Arith> RecurrenceTable<A> {
    pub fn kmax(&self) -> usize {
        self.a.len()
    }

    /// `(a_j, b_j)` with `P_{j+1} = a_j t P_j − b_j P_{j−1}`, `1 ≤ j < kmax`.
    pub fn coefficient(&self, j: usize) -> (&A::R, &A::R) {
        (&self.a[j], &self.b[j])
    }

    /// Calls `f(k, P_k(t))` for `k = 0..=kmax`.
    pub fn for_each(&self, ctx: &A, t: &A::R, mut f: impl FnMut(usize, &A::R)) {
        let mut prev = ctx.one();
        f(0, &prev);
        if self.kmax() == 0 {
            return;
        }
        let mut cur = t.clone();
        f(1, &cur);
        for j in 1..self.kmax() {
            let next = ctx.sub(
                &ctx.mul(&ctx.mul(&self.a[j], t), &cur),
                &ctx.mul(&self.b[j], &prev),
            );
            prev = std::mem::replace(&mut cur, next);
            f(j + 1, &cur);
        }
    }

    pub fn values(&self, ctx: &A, t: &A::R) -> Vec<A::R> {
        let mut out = Vec::with_capacity(self.kmax() + 1);
        self.for_each(ctx, t, |_, v| out.push(v.clone()));
        out
    }
}

pub fn eval_jacobi(basis: &JacobiBasis, k: usize, t: f64) -> Result<f64, JacobiError> {
    basis.eval(k, t)
}

pub fn eval_all(basis: &JacobiBasis, kmax: usize, t: f64) -> Result<Vec<f64>, JacobiError> {
    basis.eval_all(kmax, t)
}

/// Values in double precision through the generic path; used to cross-check
/// the multi-precision evaluator.
pub fn eval_all_generic<A: Arith>(basis: &JacobiBasis, ctx: &A, kmax: usize, t: f64) -> Vec<f64> {
    let table = basis.table(ctx, kmax);
    table
        .values(ctx, &ctx.from_f64(t))
        .iter()
        .map(|v| ctx.to_f64(v))
        .collect()
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Rational64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Rational64>) -> Self {
        let mut p = Polynomial { coeffs };
        while p.coeffs.len() > 1 && p.coeffs.last() == Some(&Rational64::from_integer(0)) {
            p.coeffs.pop();
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + to_f64(c))
    }

    pub fn eval_exact(&self, t: Rational64) -> Rational64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational64::from_integer(0), |acc, c| acc * t + c)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }

    pub fn derivative(&self) -> Polynomial {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational64::from_integer(i as i64))
            .collect::<Vec<_>>();
        Polynomial::new(if c.is_empty() { vec![0.into()] } else { c })
    }

    /// `self − t`.
    fn minus_identity(&self) -> Polynomial {
        let mut c = self.coeffs.clone();
        c.resize(c.len().max(2), 0.into());
        c[1] -= 1;
        Polynomial::new(c)
    }

    /// Quotient by `(t − 1)`, requiring `self(1) = 0`.
    fn deflate_at_one(&self) -> Polynomial {
        assert_eq!(self.eval_exact(1.into()), 0.into(), "t = 1 is not a root");
        let deg = self.degree();
        let mut q = vec![Rational64::from_integer(0); deg];
        let mut carry = Rational64::from_integer(0);
        for i in (1..=deg).rev() {
            carry = self.coeffs[i] + carry;
            q[i - 1] = carry;
        }
        Polynomial::new(q)
    }

    /// Upper bound on `|p'|` over `[-1, 1]`.
    fn lipschitz(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| i as f64 * to_f64(c).abs())
            .sum()
    }
}

fn to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn rat(p: i64, q: i64) -> Rational64 {
    Rational64::new(p, q)
}

/// Polynomial `q` with `P_k(t) ≤ q(t)` on `[0, 1]` for all `k ≥ 2`
/// (`k ≥ 4` when `n = 3`), where `ν = (n − 3)/2`.
///
/// For `n ≥ 4` this is `((n−2)t² + 1)/(n−1)`. For `n = 3` the representation
/// integral at `k = 4` evaluates to `(2/π)∫(1 − s cos²φ)² dφ = 1 − s + 3s²/8`
/// with `s = 1 − t²`.
pub fn envelope_poly(n: usize) -> Result<Polynomial, JacobiError> {
    match n {
        0..=2 => Err(JacobiError::BadDimension(n)),
        3 => Ok(Polynomial::new(vec![
            rat(3, 8),
            0.into(),
            rat(1, 4),
            0.into(),
            rat(3, 8),
        ])),
        _ => {
            let n = n as i64;
            Ok(Polynomial::new(vec![
                rat(1, n - 1),
                0.into(),
                rat(n - 2, n - 1),
            ]))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Delta {
    Exact(Rational64),
    /// Certified lower bound on the true threshold.
    LowerBound(f64),
}

impl Delta {
    pub fn value(&self) -> f64 {
        match self {
            Delta::Exact(r) => to_f64(r),
            Delta::LowerBound(x) => *x,
        }
    }
}

/// Largest `δ` with `envelope(t) ≤ t` on `[1 − δ, 1]`; for `n = 3` the
/// Legendre polynomials of degree 2 and 3 are also required to stay below `t`.
pub fn delta_threshold(n: usize) -> Result<Delta, JacobiError> {
    let env = envelope_poly(n)?;
    if n >= 4 {
        // q(t) − t = (t − 1)((n−2)t − 1)/(n−1)
        let n = n as i64;
        return Ok(Delta::Exact(rat(n - 3, n - 2)));
    }
    let legendre2 = Polynomial::new(vec![rat(-1, 2), 0.into(), rat(3, 2)]);
    let legendre3 = Polynomial::new(vec![0.into(), rat(-3, 2), 0.into(), rat(5, 2)]);
    let mut left = 0.0f64;
    for p in [&env, &legendre2, &legendre3] {
        let h = p.minus_identity().deflate_at_one();
        // p(t) − t = (t − 1) h(t) ≤ 0 wherever h ≥ 0
        let r = certified_positive_tail(&h);
        left = left.max(r);
    }
    Ok(Delta::LowerBound(round_down(1.0 - left)))
}

/// Smallest grid-isolated point `r ∈ [0, 1]` such that `h > 0` on `[r, 1]`,
/// certified by recursive Lipschitz bisection.
fn certified_positive_tail(h: &Polynomial) -> f64 {
    let grid = 4096;
    let mut r = 0.0;
    for i in (0..grid).rev() {
        let a = i as f64 / grid as f64;
        let b = (i + 1) as f64 / grid as f64;
        if h.eval(a) <= 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if h.eval(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            r = hi + 1e-9;
            break;
        }
    }
    assert!(
        positive_on(h, r, 1.0, h.lipschitz(), 0),
        "positivity certificate failed"
    );
    r
}

fn positive_on(h: &Polynomial, a: f64, b: f64, lip: f64, depth: u32) -> bool {
    let mid = 0.5 * (a + b);
    let slack = h.eval(mid) - lip * 0.5 * (b - a) * (1.0 + 1e-12) - 1e-15;
    if slack > 0.0 {
        return true;
    }
    if depth > 80 || h.eval(mid) <= 0.0 {
        return false;
    }
    positive_on(h, a, mid, lip, depth + 1) && positive_on(h, mid, b, lip, depth + 1)
}

/// `∫₀^{π/2} cos^{2ν}φ dφ = Γ(1/2)Γ(ν+1/2) / (2Γ(ν+1))`.
pub fn cos_power_integral(nu: f64) -> f64 {
    (ln_gamma(0.5) + ln_gamma(nu + 0.5) - ln_gamma(nu + 1.0)).exp() / 2.0
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let legendre = JacobiBasis { nu: 0.0 };
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre
                .eval_all_with_derivative(npts, x)
                .expect("node inside [-1, 1]");
            dp = d[npts];
            let step = p[npts] / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[npts - 1 - i] = -x;
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    const ORDER: usize = 16;
    let (x, w) = gauss_legendre(ORDER);
    let panels = points.div_ceil(ORDER).max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0));
        }
        total += 0.5 * h * s;
    }
    total
}

/// Evaluates `P_k^(ν,ν)(cos θ)` through the Feldheim–Vilenkin integral
/// (valid for `ν ≥ 0`), as an oracle independent of the recurrence.
pub fn integral_representation(
    nu: f64,
    k: usize,
    theta: f64,
    quadrature_points: usize,
) -> Result<f64, JacobiError> {
    if !(nu >= 0.0) {
        return Err(JacobiError::BadNu(nu));
    }
    if quadrature_points < 16 {
        return Err(JacobiError::TooFewPoints(quadrature_points));
    }
    let prefactor = (2.0f64.ln() + ln_gamma(nu + 1.0) - ln_gamma(0.5) - ln_gamma(nu + 0.5)).exp();
    let (s, c) = theta.sin_cos();
    let integrand = |phi: f64| {
        let cp = phi.cos();
        let base = 1.0 - s * s * cp * cp;
        if base <= 0.0 {
            return 0.0;
        }
        let arg = (c / base.sqrt()).clamp(-1.0, 1.0);
        let cheb = (k as f64 * arg.acos()).cos();
        cp.powf(2.0 * nu) * base.powf(k as f64 / 2.0) * cheb
    };
    Ok(prefactor * integrate(integrand, 0.0, std::f64::consts::FRAC_PI_2, quadrature_points))
}

/// Decay constant `C(ν) = 2e(2 + √2·ν)/π` of the Erdélyi–Magnus–Nevai bound
/// `(1 − t²)^{ν+1/2} p_k(t)² ≤ C(ν)` for orthonormal `p_k`, `ν ≥ −1/2`.
pub fn decay_constant(nu: f64) -> f64 {
    2.0 * std::f64::consts::E * (2.0 + std::f64::consts::SQRT_2 * nu) / std::f64::consts::PI
}

/// `h_k / P_k^std(1)²`, the squared scale converting the orthonormal bound
/// to the `P_k(1) = 1` normalization:
/// `2^{2ν+1} Γ(ν+1)² k! / ((2k+2ν+1) Γ(k+2ν+1))`.
fn normalized_norm_sq(nu: f64, k: usize) -> f64 {
    let kf = k as f64;
    let log = (2.0 * nu + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma(nu + 1.0)
        + ln_gamma(kf + 1.0)
        - (2.0 * kf + 2.0 * nu + 1.0).ln()
        - ln_gamma(kf + 2.0 * nu + 1.0);
    log.exp()
}

/// Certified bound on `|P_k(t)|` for `ν ≥ 0`; decreasing in `k` for each `t`.
/// A relative safety margin of `1e-8` covers the rounding in `ln Γ`.
pub fn interior_decay_bound(nu: f64, k: usize, t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 1.0;
    }
    let scale = (decay_constant(nu) * normalized_norm_sq(nu, k)).sqrt();
    let w = (1.0 - t * t).powf(-(2.0 * nu + 1.0) / 4.0);
    (scale * w * (1.0 + 1e-8)).min(1.0)
}

/// Gamma function re-exported for oracles.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Exact envelope coefficients from the general formula
/// `((2ν+1)t² + 1)/(2(ν+1))` in floating point; used to cross-check
/// [`envelope_poly`].
pub fn envelope_formula(nu: f64, t: f64) -> f64 {
    ((2.0 * nu + 1.0) * t * t + 1.0) / (2.0 * (nu + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::MultiPrecision;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn low_degrees() {
        let b = JacobiBasis::new(0.5).unwrap();
        assert_eq!(b.eval(0, 0.3).unwrap(), 1.0);
        for nu in [-0.5, 0.0, 0.5, 1.0, 2.5] {
            let b = JacobiBasis::new(nu).unwrap();
            assert_eq!(b.eval(1, -0.37).unwrap(), -0.37);
        }
        let cheb = JacobiBasis::new(-0.5).unwrap();
        assert_abs_diff_eq!(cheb.eval(4, (PI / 8.0).cos()).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_all_examples() {
        let leg = JacobiBasis::new(0.0).unwrap();
        assert_eq!(leg.eval_all(2, 1.0).unwrap(), vec![1.0, 1.0, 1.0]);
        let v = leg.eval_all(3, 0.0).unwrap();
        assert_eq!(v, vec![1.0, 0.0, -0.5, 0.0]);
        let cheb = JacobiBasis::new(-0.5).unwrap();
        let t = (PI / 4.0).cos();
        let v = cheb.eval_all(4, t).unwrap();
        let want = [1.0, t, 0.0, (3.0 * PI / 4.0).cos(), -1.0];
        for (a, b) in v.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn legendre_against_explicit_formula() {
        let leg = JacobiBasis::new(0.0).unwrap();
        for i in 0..=40 {
            let t = -1.0 + i as f64 / 20.0;
            let p4 = (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0;
            assert_abs_diff_eq!(leg.eval(4, t).unwrap(), p4, epsilon = 1e-14);
        }
    }

    #[test]
    fn gegenbauer_against_chebyshev_second_kind() {
        // ν = 1/2: P_k = U_k(t)/(k+1)
        let b = JacobiBasis::for_dimension(4).unwrap();
        for &theta in &[0.3, 1.1, 2.0, 2.9] {
            let t: f64 = f64::cos(theta);
            for k in 0..60 {
                let u = ((k as f64 + 1.0) * theta).sin() / theta.sin();
                assert_abs_diff_eq!(b.eval(k, t).unwrap(), u / (k as f64 + 1.0), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        let b = JacobiBasis::new(0.0).unwrap();
        assert!(matches!(b.eval(3, 1.1), Err(JacobiError::Domain(_))));
        assert!(b.eval(3, 1.0 + 1e-13).is_ok());
        assert!(JacobiBasis::new(-1.0).is_err());
        assert!(envelope_poly(2).is_err());
        assert!(integral_representation(-0.5, 2, 0.3, 100).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = JacobiBasis::new(1.0).unwrap();
        let (_, d) = b.eval_all_with_derivative(30, 0.4).unwrap();
        let h = 1e-6;
        for k in 0..=30 {
            let fd = (b.eval(k, 0.4 + h).unwrap() - b.eval(k, 0.4 - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(d[k], fd, epsilon = 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn multiprecision_matches_double() {
        let b = JacobiBasis::for_dimension(5).unwrap();
        let mp = MultiPrecision::with_digits(50);
        let hi = eval_all_generic(&b, &mp, 300, 0.731);
        let lo = b.eval_all(300, 0.731).unwrap();
        for (x, y) in hi.iter().zip(&lo) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn envelope_examples() {
        let e4 = envelope_poly(4).unwrap();
        assert_eq!(e4.coeffs, vec![rat(1, 3), 0.into(), rat(2, 3)]);
        let e5 = envelope_poly(5).unwrap();
        assert_eq!(e5.coeffs, vec![rat(1, 4), 0.into(), rat(3, 4)]);
        let e3 = envelope_poly(3).unwrap();
        assert_eq!(e3.degree(), 4);
        assert_eq!(e3.eval_exact(1.into()), 1.into());
        for n in 4..12 {
            let nu = (n as f64 - 3.0) / 2.0;
            let e = envelope_poly(n).unwrap();
            for i in 0..=10 {
                let t = i as f64 / 10.0;
                assert_abs_diff_eq!(e.eval(t), envelope_formula(nu, t), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn n3_envelope_matches_quadrature_of_representation() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let s = 1.0 - t * t;
            let q = integrate(|phi| (1.0 - s * phi.cos().powi(2)).powi(2), 0.0, PI / 2.0, 256)
                * 2.0
                / PI;
            assert_abs_diff_eq!(envelope_poly(3).unwrap().eval(t), q, epsilon = 1e-13);
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_threshold(4).unwrap(), Delta::Exact(rat(1, 2)));
        assert_eq!(delta_threshold(5).unwrap(), Delta::Exact(rat(2, 3)));
        let d3 = delta_threshold(3).unwrap();
        let Delta::LowerBound(v) = d3 else {
            panic!("n = 3 threshold should be a bound")
        };
        // root of 3t³ + 3t² + 5t − 3
        let r = 1.0 - v;
        assert!(v > 0.55 && v < 0.57, "{v}");
        assert!(3.0 * r.powi(3) + 3.0 * r * r + 5.0 * r - 3.0 > 0.0);
        assert!((3.0 * r.powi(3) + 3.0 * r * r + 5.0 * r - 3.0).abs() < 1e-7);
    }

    #[test]
    fn int_value_closed_form() {
        assert_abs_diff_eq!(cos_power_integral(0.5), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            gamma_fn(0.5) * gamma_fn(1.0) / (2.0 * gamma_fn(1.5)),
            1.0,
            epsilon = 1e-14
        );
        for nu in [0.0, 0.5, 1.0, 1.5, 2.5] {
            let q = integrate(|p| p.cos().powf(2.0 * nu), 0.0, PI / 2.0, 512);
            assert_abs_diff_eq!(cos_power_integral(nu), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn integral_representation_examples() {
        assert_abs_diff_eq!(integral_representation(0.0, 0, 0.7, 64).unwrap(), 1.0, epsilon = 1e-14);
        let b = JacobiBasis::new(0.5).unwrap();
        let oracle = integral_representation(0.5, 3, 1.0, 10_000).unwrap();
        assert_abs_diff_eq!(oracle, b.eval(3, 1.0f64.cos()).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn decay_bound_dominates_on_grid() {
        for nu in [0.0, 0.5, 1.0, 3.5] {
            let b = JacobiBasis::new(nu).unwrap();
            for i in 1..200 {
                let t = -1.0 + i as f64 / 100.0;
                let p = b.eval_all(400, t).unwrap();
                for (k, v) in p.iter().enumerate() {
                    assert!(v.abs() <= interior_decay_bound(nu, k, t), "nu={nu} k={k} t={t}");
                }
            }
        }
    }

    #[test]
    fn decay_bound_is_monotone_in_degree() {
        for nu in [0.0, 0.5, 2.0] {
            let mut last = f64::INFINITY;
            for k in 0..3000 {
                let s = normalized_norm_sq(nu, k);
                assert!(s <= last * (1.0 + 1e-12));
                last = s;
            }
        }
    }
}
