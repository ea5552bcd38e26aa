//! Invariant kernels on `S^{n-1}` and sign functions on the sphere.
//!
//! An invariant kernel is `K(x, y) = Σ a_k P_k(x·y)` with `a_k ≥ 0` summing
//! to one, where `P_k` are the normalized symmetric Jacobi polynomials of the
//! sphere. Reynolds transforms of sign functions are estimated by Monte Carlo
//! over Haar-random rotations, or computed exactly on the circle.

use crate::jacobi::{JacobiBasis, JacobiError, DOMAIN_TOL};
use crate::sampling::{self, arc_correlation, dot, TAU};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub const MIN_SAMPLES: usize = 1000;
/// Inner products at least `1 − COINCIDENT` count as coincident points for
/// the limit mass of a kernel.
pub const COINCIDENT: f64 = 1e-12;
const MC_CHUNK: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error("at least {MIN_SAMPLES} samples required, got {0}")]
    TooFewSamples(usize),
    #[error("argument t = {0} outside [-1, 1]")]
    Domain(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("sign function lives on S^{got}, expected S^{expected}")]
    Dimension { expected: usize, got: usize },
    #[error("exact Reynolds transform needs an arc description on the circle")]
    NotCircular,
    #[error("kmax must be at least 4, got {0}")]
    SmallKmax(usize),
}

fn check_t(t: f64) -> Result<f64, KernelError> {
    if !(t.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(KernelError::Domain(t));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// `(2/π) arcsin t`, the kernel of hyperplane rounding.
pub fn gw_kernel(t: f64) -> Result<f64, KernelError> {
    Ok(2.0 / PI * check_t(t)?.asin())
}

fn gw_ratio(t: f64) -> f64 {
    (1.0 - 2.0 / PI * t.asin()) / (1.0 - t)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    [(x1, f1), (x2, f2), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, c| if c.1 < best.1 { c } else { best })
}

/// `α_GW` and its minimizer `t_GW`.
pub fn alpha_gw() -> (f64, f64) {
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    *CELL.get_or_init(|| {
        let (t, v) = golden_section(gw_ratio, -1.0, 0.5, 1e-13);
        (v, t)
    })
}

pub fn t_gw() -> f64 {
    alpha_gw().1
}

/// `1 − K_GW(t_GW)`.
pub fn gw_gap_at_tgw() -> f64 {
    1.0 - 2.0 / PI * t_gw().asin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub n: usize,
    pub degree: usize,
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub limit_mass: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantKernel {
    n: usize,
    coeffs: Vec<f64>,
    limit: f64,
    basis: JacobiBasis,
}

impl InvariantKernel {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self, KernelError> {
        Self::with_limit(n, coeffs, 0.0)
    }

    /// Kernel `Σ a_k P_k(t) + a_∞ [t = 1]`, where the last term is the
    /// pointwise limit of `P_k` for `n ≥ 3` on `(−1, 1]`.
    pub fn with_limit(n: usize, coeffs: Vec<f64>, limit: f64) -> Result<Self, KernelError> {
        if !(limit >= 0.0) || !limit.is_finite() {
            return Err(KernelError::InvalidKernel(format!("limit mass {limit} is negative")));
        }
        if limit > 0.0 && n < 3 {
            return Err(KernelError::InvalidKernel("limit mass needs n >= 3".into()));
        }
        let basis = JacobiBasis::for_dimension(n)?;
        if coeffs.is_empty() {
            return Err(KernelError::InvalidKernel("no coefficients".into()));
        }
        if let Some((k, a)) = coeffs.iter().enumerate().find(|(_, a)| !(**a >= 0.0) || !a.is_finite()) {
            return Err(KernelError::InvalidKernel(format!("coefficient a_{k} = {a} is negative")));
        }
        let s: f64 = coeffs.iter().sum::<f64>() + limit;
        if (s - 1.0).abs() > 1e-9 {
            return Err(KernelError::InvalidKernel(format!("coefficients sum to {s}, not 1")));
        }
        Ok(InvariantKernel { n, coeffs, limit, basis })
    }

    pub fn single_degree(n: usize, k: usize) -> Result<Self, KernelError> {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::new(n, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn limit_mass(&self) -> f64 {
        self.limit
    }

    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    pub fn eval(&self, t: f64) -> Result<f64, KernelError> {
        let t = check_t(t)?;
        let p = self.basis.eval_all(self.degree(), t)?;
        let lim = if t >= 1.0 - COINCIDENT { self.limit } else { 0.0 };
        Ok(dot(&p, &self.coeffs) + lim)
    }

    /// `K(t)` and `K'(t)`; the limit term contributes no derivative.
    pub fn eval_with_derivative(&self, t: f64) -> Result<(f64, f64), KernelError> {
        let t = check_t(t)?;
        let (p, d) = self.basis.eval_all_with_derivative(self.degree(), t)?;
        let lim = if t >= 1.0 - COINCIDENT { self.limit } else { 0.0 };
        Ok((dot(&p, &self.coeffs) + lim, dot(&d, &self.coeffs)))
    }

    pub fn gram(&self, points: &[Vec<f64>]) -> Result<Vec<f64>, KernelError> {
        let m = points.len();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = self.eval(dot(&points[i], &points[j]).clamp(-1.0, 1.0))?;
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        Ok(g)
    }

    pub fn to_file(&self) -> KernelFile {
        KernelFile {
            n: self.n,
            degree: self.degree(),
            coefficients: self.coeffs.clone(),
            limit_mass: self.limit,
        }
    }

    pub fn from_file(f: &KernelFile) -> Result<Self, KernelError> {
        if f.coefficients.len() != f.degree + 1 {
            return Err(KernelError::InvalidKernel(format!(
                "degree {} but {} coefficients",
                f.degree,
                f.coefficients.len()
            )));
        }
        Self::with_limit(f.n, f.coefficients.clone(), f.limit_mass)
    }
}

/// Smallest eigenvalue of a symmetric row-major matrix.
pub fn min_eigenvalue(mat: &[f64], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let a = DMatrix::from_row_slice(m, m, mat);
    a.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Kernel matrix `(f(x_i·x_j))` for an arbitrary function of the inner product.
pub fn sampled_matrix(f: impl Fn(f64) -> f64, points: &[Vec<f64>]) -> Vec<f64> {
    let m = points.len();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = if i == j { f(1.0) } else { f(dot(&points[i], &points[j]).clamp(-1.0, 1.0)) };
        }
    }
    g
}

/// A finite partition of the sphere into measurable cells.
pub trait CellLocator: Send + Sync + fmt::Debug {
    /// Ambient dimension `n` of `S^{n-1}`.
    fn dimension(&self) -> usize;
    fn cell_count(&self) -> usize;
    fn locate(&self, x: &[f64]) -> usize;
    /// `(start, length)` arcs of each cell when the sphere is the circle.
    fn arcs(&self) -> Option<Vec<Vec<(f64, f64)>>> {
        None
    }
}

#[derive(Clone, Debug)]
pub enum SignFunction {
    Constant { n: usize, sign: i8 },
    /// `+1` on `e·x ≥ 0`.
    Halfspace { normal: Vec<f64> },
    /// `sign(cos(m θ))` on the circle.
    Windmill { order: usize },
    CellRespecting { partition: Arc<dyn CellLocator>, labels: Vec<i8> },
}

impl SignFunction {
    pub fn gw(n: usize) -> Self {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        SignFunction::Halfspace { normal: e }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SignFunction::Constant { n, .. } => *n,
            SignFunction::Halfspace { normal } => normal.len(),
            SignFunction::Windmill { .. } => 2,
            SignFunction::CellRespecting { partition, .. } => partition.dimension(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> i8 {
        match self {
            SignFunction::Constant { sign, .. } => *sign,
            SignFunction::Halfspace { normal } => {
                if dot(normal, x) >= 0.0 {
                    1
                } else {
                    -1
                }
            }
            SignFunction::Windmill { order } => {
                if (*order as f64 * sampling::angle_of(x)).cos() >= 0.0 {
                    1
                } else {
                    -1
                }
            }
            SignFunction::CellRespecting { partition, labels } => labels[partition.locate(x)],
        }
    }

    /// `(start, length, value)` arcs when the function lives on the circle.
    pub fn arcs(&self) -> Option<Vec<(f64, f64, f64)>> {
        if self.dimension() != 2 {
            return None;
        }
        match self {
            SignFunction::Constant { sign, .. } => Some(vec![(0.0, TAU, f64::from(*sign))]),
            SignFunction::Halfspace { normal } => {
                let psi = normal[1].atan2(normal[0]);
                Some(vec![(psi - PI / 2.0, PI, 1.0), (psi + PI / 2.0, PI, -1.0)])
            }
            SignFunction::Windmill { order } => {
                let m = (*order).max(1) as f64;
                let w = PI / m;
                Some(
                    (0..2 * order.max(&1))
                        .map(|j| (-w / 2.0 + j as f64 * w, w, if j % 2 == 0 { 1.0 } else { -1.0 }))
                        .collect(),
                )
            }
            SignFunction::CellRespecting { partition, labels } => {
                let cells = partition.arcs()?;
                Some(
                    cells
                        .iter()
                        .zip(labels)
                        .flat_map(|(arcs, &l)| arcs.iter().map(move |&(s, len)| (s, len, f64::from(l))))
                        .collect(),
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `R(f ⊗ f*)(t)` from `samples` Haar rotations.
pub fn reynolds_estimate(f: &SignFunction, t: f64, samples: usize, seed: u64) -> Result<Estimate, KernelError> {
    if samples < MIN_SAMPLES {
        return Err(KernelError::TooFewSamples(samples));
    }
    let t = check_t(t)?;
    let n = f.dimension();
    let s = (1.0 - t * t).max(0.0).sqrt();
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampling::substream(seed, "reynolds", c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut v = vec![0.0; n];
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let fr = sampling::haar_frame(&mut rng, n, 2);
                for i in 0..n {
                    v[i] = t * fr[0][i] + s * fr[1][i];
                }
                let x = f64::from(f.eval(&fr[0]) * f.eval(&v));
                sum += x;
                sq += x * x;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let nn = samples as f64;
    let mean = sum / nn;
    let var = ((sq - nn * mean * mean) / (nn - 1.0)).max(0.0);
    Ok(Estimate {
        estimate: mean,
        std_error: (var / nn).sqrt(),
        samples,
    })
}

/// Exact `R(f ⊗ f*)(t)` on the circle: rotations contribute the circular
/// correlation at `+Δ`, reflections at `−Δ`, with `Δ = arccos t`.
pub fn reynolds_exact_circle(f: &SignFunction, t: f64) -> Result<f64, KernelError> {
    let t = check_t(t)?;
    let arcs = f.arcs().ok_or(KernelError::NotCircular)?;
    let d = t.acos();
    Ok(0.5 * (arc_correlation(&arcs, d) + arc_correlation(&arcs, -d)))
}

/// Kernel `cos 4θ`: all mass on degree four of the circle basis.
pub fn windmill_kernel() -> InvariantKernel {
    InvariantKernel::single_degree(2, 4).expect("degree-four circle kernel")
}

/// Hyperplane rounding of `g(θ) = (cos 4θ, sin 4θ)` with `e = (1, 0)`.
pub fn windmill_sign() -> SignFunction {
    SignFunction::Windmill { order: 4 }
}

/// Closed form of the Reynolds transform of `sign cos(mθ)`: a triangular
/// wave of period `2π/m` in `Δ = arccos t`.
pub fn windmill_reynolds(order: usize, t: f64) -> Result<f64, KernelError> {
    let t = check_t(t)?;
    let p = TAU / order.max(1) as f64;
    let d = t.acos();
    let r = d.rem_euclid(p);
    let u = r.min(p - r);
    Ok(1.0 - 4.0 * u / p)
}

/// Maximizer of `1 − Σ a_k P_k(t)` over probability vectors on `0..=kmax`,
/// which puts all mass on the lowest `argmin_k P_k(t)`.
pub fn best_single_degree(n: usize, t: f64, kmax: usize) -> Result<(usize, f64), KernelError> {
    if kmax < 4 {
        return Err(KernelError::SmallKmax(kmax));
    }
    let basis = JacobiBasis::for_dimension(n)?;
    let p = basis.eval_all(kmax, check_t(t)?)?;
    let (k, v) = p
        .iter()
        .enumerate()
        .fold((0, p[0]), |best, (k, &v)| if v < best.1 { (k, v) } else { best });
    Ok((k, 1.0 - v))
}

/// `margin = (1 − K(t_GW)) − (1 − K_GW(t_GW))`; improves iff `margin > tol`.
pub fn gw_improvement_test(k_at_tgw: f64, tol: f64) -> (bool, f64) {
    let margin = (1.0 - k_at_tgw) - gw_gap_at_tgw();
    (margin > tol, margin)
}

impl InvariantKernel {
    pub fn gw_improvement(&self, tol: f64) -> Result<(bool, f64), KernelError> {
        Ok(gw_improvement_test(self.eval(t_gw())?, tol))
    }
}

/// `λ · R(windmill) + (1 − λ) · K_GW` on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedKernel {
    pub lambda: f64,
}

impl MixedKernel {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let w = windmill_reynolds(4, t).expect("clamped argument");
        self.lambda * w + (1.0 - self.lambda) * 2.0 / PI * t.asin()
    }

    pub fn ratio(&self, t: f64) -> f64 {
        (1.0 - self.eval(t)) / (1.0 - t)
    }

    /// `(min ratio, argmin)` over `[−1, 1)`: dense grid, then golden-section
    /// polish around every grid local minimum.
    pub fn min_ratio(&self, resolution: usize) -> (f64, f64) {
        let res = resolution.max(16);
        let h = 2.0 / res as f64;
        let ts: Vec<f64> = (0..res).map(|i| -1.0 + i as f64 * h).collect();
        let rs: Vec<f64> = ts.iter().map(|&t| self.ratio(t)).collect();
        let mut best = (rs[0], ts[0]);
        for i in 0..res {
            let left = if i == 0 { f64::INFINITY } else { rs[i - 1] };
            let right = if i + 1 == res { f64::INFINITY } else { rs[i + 1] };
            if rs[i] <= left && rs[i] <= right {
                let lo = (ts[i] - h).max(-1.0);
                let hi = (ts[i] + h).min(1.0 - 1e-12);
                let (t, v) = golden_section(|t| self.ratio(t), lo, hi, 1e-13);
                let cand = if v < rs[i] { (v, t) } else { (rs[i], ts[i]) };
                if cand.0 < best.0 {
                    best = cand;
                }
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixResult {
    pub lambda: f64,
    pub alpha: f64,
    pub argmin_t: f64,
    pub kernel: MixedKernel,
}

/// Best mixture of the windmill transform with `K_GW`. The min-ratio is a
/// minimum of affine functions of `λ`, hence concave, so golden section
/// over `λ` finds the maximizer.
pub fn avidor_zwick_mix(resolution: usize) -> MixResult {
    let h = |l: f64| -MixedKernel { lambda: l }.min_ratio(resolution).0;
    let (lambda, _) = golden_section(h, 0.0, 1.0, 1e-10);
    let kernel = MixedKernel { lambda };
    let (alpha, argmin_t) = kernel.min_ratio(resolution);
    MixResult {
        lambda,
        alpha,
        argmin_t,
        kernel,
    }
}

/// `32/(25 + 5√5)`.
pub fn alpha2_closed_form() -> f64 {
    32.0 / (25.0 + 5.0 * 5f64.sqrt())
}

/// CSV rows `t,K(t),ratio` on a uniform grid of `[−1, 1)`.
pub fn plot_csv(k: impl Fn(f64) -> f64, points: usize) -> String {
    let mut out = String::from("t,K,ratio\n");
    let points = points.max(2);
    for i in 0..points {
        let t = -1.0 + 2.0 * i as f64 / points as f64;
        let v = k(t);
        out.push_str(&format!("{t},{v},{}\n", (1.0 - v) / (1.0 - t)));
    }
    out
}
