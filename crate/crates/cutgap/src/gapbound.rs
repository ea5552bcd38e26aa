//! Upper bounds on `α_n` from the truncated kernel relaxation.
//!
//! The primal LP searches for an invariant kernel `K = Σ a_k P_k` that stays
//! inside the cut polytope on the constraints found so far and maximizes
//! `α` subject to `1 − K(t) ≥ α(1 − t)` on a finite grid. Its dual
//! `(λ, z, y)` is a certificate: whenever
//!
//! ```text
//! Σ_t z(t)(1 − t) = 1,   λ + Σ_t z(t) P_k(t) − Σ y r_k ≥ 0 for all k,
//! ```
//!
//! weak duality gives `α_n ≤ λ + Σ z − Σ y β`. Certificates are checked in
//! multi-precision arithmetic, degree by degree up to `K_check`, and beyond
//! that by a decay envelope for the Jacobi polynomials.

use crate::arith::{Arith, Double, MultiPrecision};
use crate::cutpoly::{
    validate_inequality, CutError, InequalityFamily, LinearInequality, Provenance, MAX_ENUMERATION,
};
use crate::jacobi::{interior_decay_bound, JacobiBasis, JacobiError};
use crate::kernels::{min_eigenvalue, InvariantKernel, KernelError};
use crate::lpcore::{self, weak_duality_check, DualityCheck, LinearProgram, LpError, LpSolution, LpStatus, RowSense, Sense, SolveOptions, SolvePath};
use crate::sampling::{self, dot, norm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const CERT_VERSION: u32 = 1;
pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const GRID_TOP: f64 = 1.0 - 1e-4;
pub const DEFAULT_DIGITS: u32 = 50;
/// Dual weights below this are dropped from certificates.
pub const DROP_WEIGHT: f64 = 1e-14;
pub const UNIT_TOL: f64 = 1e-9;
pub const RENORMALIZE_TOL: f64 = 1e-9;
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP solver ended with status {0:?}")]
    Solver(LpStatus),
    #[error("weak duality check failed: {0}")]
    Duality(String),
    #[error("sample grid is empty")]
    EmptyGrid,
    #[error("invalid sample grid: {0}")]
    BadGrid(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("point {index} has norm {norm}, not 1")]
    NonUnit { index: usize, norm: f64 },
    #[error("point {index} has dimension {got}, expected {expected}")]
    PointDimension { index: usize, expected: usize, got: usize },
    #[error("certificate parse error: {0}")]
    Parse(String),
}

/// `max(5d, 5000)`.
pub fn default_k_check(d: usize) -> usize {
    (5 * d).max(5000)
}

/// Sorted, distinct inner products in `[−1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    ts: Vec<f64>,
}

impl SampleGrid {
    pub fn new(mut ts: Vec<f64>) -> Result<Self, GapError> {
        if ts.is_empty() {
            return Err(GapError::EmptyGrid);
        }
        if let Some(t) = ts.iter().find(|t| !(**t >= -1.0 && **t < 1.0)) {
            return Err(GapError::BadGrid(format!("point {t} outside [-1, 1)")));
        }
        ts.sort_by(f64::total_cmp);
        if ts.windows(2).any(|w| w[0] == w[1]) {
            return Err(GapError::BadGrid("repeated point".into()));
        }
        Ok(SampleGrid { ts })
    }

    pub fn uniform(points: usize, lo: f64, hi: f64) -> Result<Self, GapError> {
        if points == 0 {
            return Err(GapError::EmptyGrid);
        }
        if points == 1 {
            return Self::new(vec![lo]);
        }
        let h = (hi - lo) / (points - 1) as f64;
        Self::new((0..points).map(|i| if i + 1 == points { hi } else { lo + h * i as f64 }).collect())
    }

    /// 2001 equally spaced points in `[−1, 1 − 10⁻⁴]`.
    pub fn standard() -> Self {
        Self::uniform(DEFAULT_GRID_POINTS, -1.0, GRID_TOP).expect("standard grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.ts
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }
}

fn check_points(points: &[Vec<f64>], m: usize, n: usize) -> Result<(), GapError> {
    if points.len() != m {
        return Err(GapError::BadParameter(format!("{} points for an inequality of size {m}", points.len())));
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(GapError::PointDimension { index, expected: n, got: p.len() });
        }
        let r = norm(p);
        if !((r - 1.0).abs() <= UNIT_TOL) {
            return Err(GapError::NonUnit { index, norm: r });
        }
    }
    Ok(())
}

/// `r_k = Σ_{x,y ∈ U} Z(x, y) P_k(x·y)` for `k = 0..=d`.
pub fn constraint_to_rk(ineq: &LinearInequality, points: &[Vec<f64>], n: usize, d: usize) -> Result<Vec<f64>, GapError> {
    check_points(points, ineq.m, n)?;
    let basis = JacobiBasis::for_dimension(n)?;
    let m = ineq.m;
    let diag: f64 = (0..m).map(|i| ineq.z(i, i)).sum();
    let mut r = vec![diag; d + 1];
    for i in 0..m {
        for j in (i + 1)..m {
            let w = ineq.z(i, j) + ineq.z(j, i);
            if w == 0.0 {
                continue;
            }
            let t = if points[i] == points[j] { 1.0 } else { dot(&points[i], &points[j]).clamp(-1.0, 1.0) };
            let p = basis.eval_all(d, t)?;
            r.iter_mut().zip(&p).for_each(|(rk, pk)| *rk += w * pk);
        }
    }
    Ok(r)
}

/// Part of `r_k` that does not decay: the diagonal and identical points.
fn limit_transform(ineq: &LinearInequality, points: &[Vec<f64>]) -> f64 {
    let m = ineq.m;
    let mut s: f64 = (0..m).map(|i| ineq.z(i, i)).sum();
    for i in 0..m {
        for j in (i + 1)..m {
            if points[i] == points[j] {
                s += ineq.z(i, j) + ineq.z(j, i);
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutConstraint {
    pub ineq: LinearInequality,
    pub points: Vec<Vec<f64>>,
    /// `r_0..r_d`.
    pub r: Vec<f64>,
    pub r_limit: f64,
}

impl CutConstraint {
    pub fn new(ineq: LinearInequality, points: Vec<Vec<f64>>, n: usize, d: usize) -> Result<Self, GapError> {
        let r = constraint_to_rk(&ineq, &points, n, d)?;
        let r_limit = limit_transform(&ineq, &points);
        Ok(CutConstraint { ineq, points, r, r_limit })
    }

    pub fn degree(&self) -> usize {
        self.r.len() - 1
    }

    fn extended(&self, n: usize, d: usize) -> Result<Self, GapError> {
        if self.degree() >= d {
            return Ok(self.clone());
        }
        Self::new(self.ineq.clone(), self.points.clone(), n, d)
    }
}

struct Layout {
    alpha: usize,
    degrees: Vec<usize>,
    cols: Vec<usize>,
    limit: Option<usize>,
    grid_row0: usize,
    cons_row0: usize,
}

fn assemble(
    n: usize,
    degrees: &[usize],
    grid: &SampleGrid,
    cons: &[CutConstraint],
    with_limit: bool,
) -> Result<(LinearProgram, Layout), GapError> {
    let basis = JacobiBasis::for_dimension(n)?;
    let maxdeg = degrees.iter().copied().max().unwrap_or(0);
    let mut lp = LinearProgram::new(Sense::Maximize);
    let alpha = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 1.0, "alpha");
    let cols: Vec<usize> = degrees
        .iter()
        .map(|k| lp.add_var(0.0, f64::INFINITY, 0.0, format!("a{k}")))
        .collect();
    let limit = with_limit.then(|| lp.add_var(0.0, f64::INFINITY, 0.0, "a_inf"));

    let mut norm_row: Vec<(usize, f64)> = cols.iter().map(|&c| (c, 1.0)).collect();
    if let Some(l) = limit {
        norm_row.push((l, 1.0));
    }
    lp.add_row(norm_row, RowSense::Eq, 1.0, "norm");

    let grid_row0 = lp.rows.len();
    for (i, &t) in grid.points().iter().enumerate() {
        let p = basis.eval_all(maxdeg, t)?;
        let mut row = vec![(alpha, 1.0 - t)];
        row.extend(degrees.iter().zip(&cols).map(|(&k, &c)| (c, p[k])));
        lp.add_row(row, RowSense::Le, 1.0, format!("t{i}"));
    }
    let cons_row0 = lp.rows.len();
    for (i, c) in cons.iter().enumerate() {
        if c.degree() < maxdeg {
            return Err(GapError::BadParameter(format!("constraint {i} transformed only to degree {}", c.degree())));
        }
        let mut row: Vec<(usize, f64)> = degrees.iter().zip(&cols).map(|(&k, &col)| (col, c.r[k])).collect();
        if let Some(l) = limit {
            row.push((l, c.r_limit));
        }
        lp.add_row(row, RowSense::Ge, c.ineq.beta, format!("c{i}"));
    }
    Ok((
        lp,
        Layout {
            alpha,
            degrees: degrees.to_vec(),
            cols,
            limit,
            grid_row0,
            cons_row0,
        },
    ))
}

/// Primal LP with `α` (column 0), `a_0..a_d` and, for `n ≥ 3`, a limit
/// column `a_∞` for the mass that escapes to infinite degree. Row 0 is
/// `Σ a = 1`, then one row per grid point, then one per constraint.
pub fn build_primal(n: usize, d: usize, grid: &SampleGrid, cons: &[CutConstraint]) -> Result<LinearProgram, GapError> {
    if d < 1 {
        return Err(GapError::BadParameter("degree must be at least 1".into()));
    }
    let degrees: Vec<usize> = (0..=d).collect();
    Ok(assemble(n, &degrees, grid, cons, n >= 3)?.0)
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub tol: f64,
    pub k_check: usize,
    /// Add degrees in `(d, K_check]` whose dual constraints fail, and resolve.
    pub column_generation: bool,
    pub max_generation_rounds: usize,
}

impl BoundOptions {
    pub fn for_degree(d: usize) -> Self {
        BoundOptions {
            tol: 1e-9,
            k_check: default_k_check(d),
            column_generation: false,
            max_generation_rounds: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundSolution {
    pub alpha: f64,
    pub kernel: InvariantKernel,
    pub certificate: DualCertificate,
    pub duality: DualityCheck,
    pub degrees: Vec<usize>,
    pub iterations: usize,
}

struct Duals {
    lambda: f64,
    z: Vec<f64>,
    y: Vec<f64>,
}

fn extract_duals(sol: &LpSolution, lay: &Layout, grid: &SampleGrid, cons: &[CutConstraint]) -> Duals {
    let z = (0..grid.len()).map(|i| sol.dual[lay.grid_row0 + i].max(0.0)).collect();
    let y = (0..cons.len()).map(|i| (-sol.dual[lay.cons_row0 + i]).max(0.0)).collect();
    Duals {
        lambda: sol.dual[0],
        z,
        y,
    }
}

/// `λ + Σ z P_k(t) − Σ y r_k` for `k = 0..=kmax` in double precision.
fn dual_slacks(basis: &JacobiBasis, kmax: usize, grid: &SampleGrid, cons: &[CutConstraint], du: &Duals) -> Result<Vec<f64>, GapError> {
    let mut s = vec![du.lambda; kmax + 1];
    for (&t, &z) in grid.points().iter().zip(&du.z) {
        if z > 0.0 {
            let p = basis.eval_all(kmax, t)?;
            s.iter_mut().zip(&p).for_each(|(a, b)| *a += z * b);
        }
    }
    for (c, &y) in cons.iter().zip(&du.y) {
        if y > 0.0 {
            s.iter_mut().zip(&c.r).for_each(|(a, b)| *a -= y * b);
        }
    }
    Ok(s)
}

fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpSolution, GapError> {
    let mut last = LpStatus::NumericalFailure;
    for (t, path) in [(tol, SolvePath::Auto), (tol * 1e-2, SolvePath::Auto), (tol, SolvePath::Primal)] {
        let opts = SolveOptions {
            tol: t.max(1e-12),
            path,
            ..SolveOptions::default()
        };
        let sol = lpcore::solve(lp, &opts)?;
        match sol.status {
            LpStatus::Optimal => return Ok(sol),
            LpStatus::NumericalFailure => last = sol.status,
            other => return Err(GapError::Solver(other)),
        }
    }
    Err(GapError::Solver(last))
}

/// Solves the primal and reads a dual certificate off the optimal basis.
pub fn solve_bound(
    n: usize,
    d: usize,
    grid: &SampleGrid,
    cons: &[CutConstraint],
    opts: &BoundOptions,
) -> Result<BoundSolution, GapError> {
    if d < 1 {
        return Err(GapError::BadParameter("degree must be at least 1".into()));
    }
    let basis = JacobiBasis::for_dimension(n)?;
    let with_limit = n >= 3;
    let mut degrees: Vec<usize> = (0..=d).collect();
    let cons_ext: Vec<CutConstraint> = if opts.column_generation {
        cons.iter().map(|c| c.extended(n, opts.k_check)).collect::<Result<_, _>>()?
    } else {
        cons.to_vec()
    };
    let mut iterations = 0;
    let mut rounds = 0;
    let (sol, lay, lp, du) = loop {
        let (lp, lay) = assemble(n, &degrees, grid, &cons_ext, with_limit)?;
        let sol = solve_lp(&lp, opts.tol)?;
        iterations += sol.iterations;
        let du = extract_duals(&sol, &lay, grid, &cons_ext);
        if !opts.column_generation || rounds >= opts.max_generation_rounds {
            break (sol, lay, lp, du);
        }
        let slack = dual_slacks(&basis, opts.k_check, grid, &cons_ext, &du)?;
        let mut bad: Vec<(usize, f64)> = slack
            .iter()
            .enumerate()
            .filter(|(k, s)| **s < -1e-11 && !degrees.contains(k))
            .map(|(k, s)| (k, *s))
            .collect();
        if bad.is_empty() {
            break (sol, lay, lp, du);
        }
        bad.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        degrees.extend(bad.iter().take(32).map(|b| b.0));
        degrees.sort_unstable();
        rounds += 1;
    };

    let scale = opts.tol * (1.0 + sol.objective.abs());
    let duality = weak_duality_check(&lp, &sol.primal, &sol.dual);
    if !duality.holds(scale.max(1e-9)) {
        return Err(GapError::Duality(format!("{duality:?}")));
    }
    let alpha = sol.primal[lay.alpha];

    let maxdeg = *lay.degrees.iter().max().expect("nonempty degree set");
    let mut coeffs = vec![0.0; maxdeg + 1];
    for (&k, &c) in lay.degrees.iter().zip(&lay.cols) {
        coeffs[k] = sol.primal[c].max(0.0);
    }
    let limit = lay.limit.map_or(0.0, |l| sol.primal[l].max(0.0));
    let total: f64 = coeffs.iter().sum::<f64>() + limit;
    coeffs.iter_mut().for_each(|a| *a /= total);
    let kernel = InvariantKernel::with_limit(n, coeffs, limit / total)?;

    let mut cert = DualCertificate {
        n,
        d,
        k_check: opts.k_check,
        level: VerificationLevel::Float,
        lambda: du.lambda,
        alpha: 0.0,
        grid: grid
            .points()
            .iter()
            .zip(&du.z)
            .filter(|(_, &z)| z >= DROP_WEIGHT)
            .map(|(&t, &z)| GridWeight { t, z })
            .collect(),
        constraints: cons
            .iter()
            .zip(&du.y)
            .filter(|(_, &y)| y >= DROP_WEIGHT)
            .map(|(c, &y)| CertConstraint {
                ineq: c.ineq.clone(),
                points: c.points.clone(),
                y,
            })
            .collect(),
        meta: CertMeta::default(),
    };
    cert.alpha = cert.objective();
    if cert.alpha < alpha - scale.max(1e-9) {
        return Err(GapError::Duality(format!("dual objective {} below primal {alpha}", cert.alpha)));
    }
    Ok(BoundSolution {
        alpha,
        kernel,
        certificate: cert,
        duality,
        degrees: lay.degrees,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub ineq: LinearInequality,
    pub points: Vec<Vec<f64>>,
    /// `Σ Z(i,j) K(x_i·x_j) − β`, negative when violated.
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 8,
            max_iterations: 400,
            tol: 1e-9,
        }
    }
}

fn placement_value(kernel: &InvariantKernel, ineq: &LinearInequality, x: &[Vec<f64>], grad: Option<&mut [Vec<f64>]>) -> f64 {
    let m = ineq.m;
    let mut val: f64 = (0..m).map(|i| ineq.z(i, i)).sum::<f64>() * kernel.eval(1.0).unwrap_or(1.0) - ineq.beta;
    let mut g = grad;
    if let Some(g) = g.as_deref_mut() {
        g.iter_mut().for_each(|v| v.iter_mut().for_each(|e| *e = 0.0));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let w = ineq.z(i, j) + ineq.z(j, i);
            if w == 0.0 {
                continue;
            }
            let t = dot(&x[i], &x[j]).clamp(-1.0, 1.0);
            let (k, dk) = kernel.eval_with_derivative(t).unwrap_or((0.0, 0.0));
            val += w * k;
            if let Some(g) = g.as_deref_mut() {
                for c in 0..x[i].len() {
                    g[i][c] += w * dk * x[j][c];
                    g[j][c] += w * dk * x[i][c];
                }
            }
        }
    }
    val
}

fn project_tangent(x: &[Vec<f64>], g: &mut [Vec<f64>]) {
    for (xi, gi) in x.iter().zip(g.iter_mut()) {
        let p = dot(xi, gi);
        gi.iter_mut().zip(xi).for_each(|(a, b)| *a -= p * b);
    }
}

fn retract(x: &[Vec<f64>], g: &[Vec<f64>], eta: f64) -> Vec<Vec<f64>> {
    x.iter()
        .zip(g)
        .map(|(xi, gi)| {
            let mut v: Vec<f64> = xi.iter().zip(gi).map(|(a, b)| a - eta * b).collect();
            let r = norm(&v);
            v.iter_mut().for_each(|e| *e /= r);
            v
        })
        .collect()
}

fn sq_norm(g: &[Vec<f64>]) -> f64 {
    g.iter().map(|v| dot(v, v)).sum()
}

/// Riemannian gradient descent on the product of spheres with Armijo
/// backtracking and Barzilai–Borwein step sizes.
fn descend(kernel: &InvariantKernel, ineq: &LinearInequality, mut x: Vec<Vec<f64>>, iters: usize) -> (f64, Vec<Vec<f64>>) {
    let n = x[0].len();
    let mut g = vec![vec![0.0; n]; x.len()];
    let mut f = placement_value(kernel, ineq, &x, Some(&mut g));
    project_tangent(&x, &mut g);
    let mut step = 0.1;
    let mut g_new = g.clone();
    for _ in 0..iters {
        let gn2 = sq_norm(&g);
        if gn2 < 1e-22 {
            break;
        }
        let mut eta = step;
        let mut accepted = None;
        for _ in 0..40 {
            let xn = retract(&x, &g, eta);
            let fnew = placement_value(kernel, ineq, &xn, None);
            if fnew <= f - 1e-4 * eta * gn2 {
                accepted = Some((xn, fnew));
                break;
            }
            eta *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        placement_value(kernel, ineq, &xn, Some(&mut g_new));
        project_tangent(&xn, &mut g_new);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..x.len() {
            for c in 0..n {
                let s = xn[i][c] - x[i][c];
                ss += s * s;
                sy += s * (g_new[i][c] - g[i][c]);
            }
        }
        step = if sy > 1e-300 { (ss / sy).clamp(1e-8, 1e3) } else { (eta * 2.0).min(1e3) };
        let gain = f - fnew;
        x = xn;
        f = fnew;
        std::mem::swap(&mut g, &mut g_new);
        if gain <= 1e-15 * (1.0 + f.abs()) {
            break;
        }
    }
    (f, x)
}

/// Makes nearly coincident points identical and nearly antipodal points
/// exact negatives, so their inner products are exactly `±1`.
fn snap(points: &mut [Vec<f64>]) {
    for j in 1..points.len() {
        for i in 0..j {
            let t = dot(&points[i], &points[j]);
            if t > 1.0 - 1e-9 {
                points[j] = points[i].clone();
                break;
            }
            if t < -1.0 + 1e-9 {
                points[j] = points[i].iter().map(|v| -v).collect();
                break;
            }
        }
    }
}

/// Minimizes `Σ Z(i,j) K(x_i·x_j) − β` over placements for every inequality
/// and returns those with value below `−10·tol`.
pub fn search_violations(
    kernel: &InvariantKernel,
    ineqs: &[LinearInequality],
    seed: u64,
    opts: &SearchOptions,
) -> Vec<Violation> {
    let n = kernel.n();
    let mut out = Vec::new();
    for (idx, ineq) in ineqs.iter().enumerate() {
        let runs: Vec<(f64, Vec<Vec<f64>>)> = (0..opts.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = sampling::substream(seed, "search", (idx as u64) << 32 | r as u64);
                let x0: Vec<Vec<f64>> = (0..ineq.m).map(|_| sampling::random_unit(&mut rng, n)).collect();
                let (_, mut x) = descend(kernel, ineq, x0, opts.max_iterations);
                snap(&mut x);
                (placement_value(kernel, ineq, &x, None), x)
            })
            .collect();
        let best = runs
            .into_iter()
            .fold(None, |best: Option<(f64, Vec<Vec<f64>>)>, c| match &best {
                Some(b) if b.0 <= c.0 => best,
                _ => Some(c),
            })
            .expect("at least one restart");
        if best.0 < -10.0 * opts.tol {
            out.push(Violation {
                ineq: ineq.clone(),
                points: best.1,
                value: best.0,
            });
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct LoopConfig {
    pub n: usize,
    pub d: usize,
    pub grid: SampleGrid,
    pub families: Vec<InequalityFamily>,
    pub max_rounds: usize,
    pub seed: u64,
    pub search: SearchOptions,
    pub bound: BoundOptions,
}

impl LoopConfig {
    pub fn new(n: usize, d: usize, families: Vec<InequalityFamily>, max_rounds: usize, seed: u64) -> Self {
        LoopConfig {
            n,
            d,
            grid: SampleGrid::standard(),
            families,
            max_rounds,
            seed,
            search: SearchOptions::default(),
            bound: BoundOptions {
                column_generation: true,
                ..BoundOptions::for_degree(d)
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoopResult {
    pub bound: f64,
    pub certificate: DualCertificate,
    /// Primal optimum after each round, before column generation.
    pub history: Vec<f64>,
    pub constraints: Vec<CutConstraint>,
    pub rounds: usize,
}

/// Alternates LP solves with violation searches until nothing is violated
/// or the round cap is reached, then solves once more with degree column
/// generation to produce the certificate.
pub fn bound_loop(cfg: &LoopConfig) -> Result<LoopResult, GapError> {
    let ineqs: Vec<LinearInequality> = cfg.families.iter().flat_map(InequalityFamily::inequalities).collect();
    let plain = BoundOptions {
        column_generation: false,
        ..cfg.bound.clone()
    };
    let mut cons: Vec<CutConstraint> = Vec::new();
    let mut history = Vec::new();
    let mut rounds = 0;
    loop {
        let sol = solve_bound(cfg.n, cfg.d, &cfg.grid, &cons, &plain)?;
        history.push(sol.alpha);
        log::info!("round {rounds}: alpha {} with {} constraints", sol.alpha, cons.len());
        if rounds >= cfg.max_rounds {
            break;
        }
        let found = search_violations(&sol.kernel, &ineqs, sampling_seed(cfg.seed, rounds), &cfg.search);
        if found.is_empty() {
            break;
        }
        for v in found {
            cons.push(CutConstraint::new(v.ineq, v.points, cfg.n, cfg.d)?);
        }
        rounds += 1;
    }
    let last = *history.last().expect("at least one solve");
    let (bound, mut certificate) = if cfg.bound.column_generation {
        let sol = solve_bound(cfg.n, cfg.d, &cfg.grid, &cons, &cfg.bound)?;
        (sol.alpha, sol.certificate)
    } else {
        let sol = solve_bound(cfg.n, cfg.d, &cfg.grid, &cons, &plain)?;
        (last, sol.certificate)
    };
    certificate.meta.seed = Some(cfg.seed);
    Ok(LoopResult {
        bound: bound.max(certificate.alpha),
        certificate,
        history,
        constraints: cons,
        rounds,
    })
}

fn sampling_seed(seed: u64, round: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(round as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationLevel {
    Float,
    HighPrecision(u32),
    TailBounded(u32),
}

impl fmt::Display for VerificationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerificationLevel::Float => write!(f, "float"),
            VerificationLevel::HighPrecision(d) => write!(f, "high-precision({d})"),
            VerificationLevel::TailBounded(d) => write!(f, "tail-bounded({d})"),
        }
    }
}

impl FromStr for VerificationLevel {
    type Err = GapError;
    fn from_str(s: &str) -> Result<Self, GapError> {
        if s == "float" {
            return Ok(VerificationLevel::Float);
        }
        let digits = |p: &str| {
            s.strip_prefix(p)
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.parse::<u32>().ok())
        };
        if let Some(d) = digits("high-precision(") {
            return Ok(VerificationLevel::HighPrecision(d));
        }
        if let Some(d) = digits("tail-bounded(") {
            return Ok(VerificationLevel::TailBounded(d));
        }
        Err(GapError::Parse(format!("unknown verification level {s}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridWeight {
    pub t: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertConstraint {
    pub ineq: LinearInequality,
    pub points: Vec<Vec<f64>>,
    pub y: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertMeta {
    pub seed: Option<u64>,
    pub created: String,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub n: usize,
    pub d: usize,
    pub k_check: usize,
    pub level: VerificationLevel,
    pub lambda: f64,
    /// Claimed bound `λ + Σ z − Σ y β`.
    pub alpha: f64,
    pub grid: Vec<GridWeight>,
    pub constraints: Vec<CertConstraint>,
    pub meta: CertMeta,
}

impl DualCertificate {
    pub fn objective(&self) -> f64 {
        self.lambda + self.grid.iter().map(|g| g.z).sum::<f64>()
            - self.constraints.iter().map(|c| c.y * c.ineq.beta).sum::<f64>()
    }

    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            version: CERT_VERSION,
            n: self.n,
            d: self.d,
            k_check: self.k_check,
            verification_level: self.level.to_string(),
            lambda: num(self.lambda),
            alpha: num(self.alpha),
            grid: self.grid.iter().map(|g| GridRecord { t: num(g.t), z: num(g.z) }).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintRecord {
                    m: c.ineq.m,
                    z: c.ineq.z.chunks(c.ineq.m.max(1)).map(|row| row.iter().map(|&v| num(v)).collect()).collect(),
                    beta: num(c.ineq.beta),
                    points: c.points.iter().map(|p| p.iter().map(|&v| num(v)).collect()).collect(),
                    y: num(c.y),
                    provenance: c.ineq.provenance.to_string(),
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("certificate serializes") + "\n"
    }

    pub fn from_file(f: &CertificateFile) -> Result<Self, GapError> {
        if f.version != CERT_VERSION {
            return Err(GapError::Parse(format!("unsupported certificate version {}", f.version)));
        }
        let constraints = f
            .constraints
            .iter()
            .map(|c| {
                let z = c
                    .z
                    .iter()
                    .flat_map(|row| row.iter().map(|s| parse_num(s)))
                    .collect::<Result<Vec<f64>, _>>()?;
                let points = c
                    .points
                    .iter()
                    .map(|p| p.iter().map(|s| parse_num(s)).collect::<Result<Vec<f64>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                let provenance = Provenance::from_str(&c.provenance).map_err(|e| GapError::Parse(e.to_string()))?;
                Ok(CertConstraint {
                    ineq: LinearInequality {
                        m: c.m,
                        z,
                        beta: parse_num(&c.beta)?,
                        provenance,
                    },
                    points,
                    y: parse_num(&c.y)?,
                })
            })
            .collect::<Result<Vec<_>, GapError>>()?;
        Ok(DualCertificate {
            n: f.n,
            d: f.d,
            k_check: f.k_check,
            level: f.verification_level.parse()?,
            lambda: parse_num(&f.lambda)?,
            alpha: parse_num(&f.alpha)?,
            grid: f
                .grid
                .iter()
                .map(|g| Ok(GridWeight { t: parse_num(&g.t)?, z: parse_num(&g.z)? }))
                .collect::<Result<Vec<_>, GapError>>()?,
            constraints,
            meta: f.meta.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self, GapError> {
        let f: CertificateFile = serde_json::from_str(s).map_err(|e| GapError::Parse(e.to_string()))?;
        Self::from_file(&f)
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_num(s: &str) -> Result<f64, GapError> {
    s.trim().parse::<f64>().map_err(|_| GapError::Parse(format!("not a number: {s:?}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridRecord {
    pub t: String,
    pub z: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub m: usize,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<String>>,
    pub beta: String,
    pub points: Vec<Vec<String>>,
    pub y: String,
    pub provenance: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "K_check")]
    pub k_check: usize,
    pub verification_level: String,
    pub lambda: String,
    pub alpha: String,
    pub grid: Vec<GridRecord>,
    pub constraints: Vec<ConstraintRecord>,
    pub meta: CertMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerifyStep {
    Structure,
    Inequalities,
    Placement,
    Transform,
    Weights,
    Objective,
    Degrees,
    Tail,
}

impl VerifyStep {
    pub const ALL: [VerifyStep; 8] = [
        VerifyStep::Structure,
        VerifyStep::Inequalities,
        VerifyStep::Placement,
        VerifyStep::Transform,
        VerifyStep::Weights,
        VerifyStep::Objective,
        VerifyStep::Degrees,
        VerifyStep::Tail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerifyStep::Structure => "structure",
            VerifyStep::Inequalities => "inequalities",
            VerifyStep::Placement => "placement",
            VerifyStep::Transform => "transform",
            VerifyStep::Weights => "weights",
            VerifyStep::Objective => "objective",
            VerifyStep::Degrees => "degrees",
            VerifyStep::Tail => "tail",
        }
    }

    /// Distinct numeric code, also used in reports.
    pub fn code(self) -> u8 {
        VerifyStep::ALL.iter().position(|s| *s == self).expect("listed") as u8 + 1
    }
}

impl fmt::Display for VerifyStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("verification failed at step {} ({step}): {detail}", step.code())]
pub struct VerifyFailure {
    pub step: VerifyStep,
    pub detail: String,
}

fn fail<T>(step: VerifyStep, detail: impl Into<String>) -> Result<T, VerifyFailure> {
    Err(VerifyFailure {
        step,
        detail: detail.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailOutcome {
    Certified { margin: f64 },
    Failed { deficit: f64 },
    /// No decay envelope on the circle.
    Inapplicable,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Decimal digits; `0` verifies in plain double precision.
    pub digits: u32,
    /// Overrides the certificate's `K_check`.
    pub k_check: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            digits: DEFAULT_DIGITS,
            k_check: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Bound valid for every degree up to `k_check`.
    pub verified_bound: f64,
    pub claimed_bound: f64,
    pub level: VerificationLevel,
    pub k_check: usize,
    /// `Σ z(1 − t)` before renormalization.
    pub weight_sum: f64,
    /// Bound increase from replacing `β` by the true minimum over cuts.
    pub validity_adjustment: f64,
    pub lambda_bump: f64,
    pub worst_degree: usize,
    pub tail: TailOutcome,
    /// Bound valid for all degrees, when the tail rule yields one.
    pub tail_bound: Option<f64>,
    pub steps: Vec<(VerifyStep, String)>,
}

impl VerifyReport {
    pub fn label(&self) -> String {
        match self.tail {
            TailOutcome::Certified { .. } => "tail-bounded".to_string(),
            _ => format!("verified up to degree {}", self.k_check),
        }
    }

    /// The strongest bound valid for all degrees.
    pub fn all_degree_bound(&self) -> Option<f64> {
        match self.tail {
            TailOutcome::Certified { .. } => Some(self.verified_bound),
            TailOutcome::Failed { .. } => self.tail_bound,
            TailOutcome::Inapplicable => None,
        }
    }
}

pub fn verify_certificate(cert: &DualCertificate, opts: &VerifyOptions) -> Result<VerifyReport, VerifyFailure> {
    if opts.digits == 0 {
        verify_with(&Double, cert, opts, VerificationLevel::Float)
    } else {
        let ctx = MultiPrecision::with_digits(opts.digits);
        verify_with(&ctx, cert, opts, VerificationLevel::HighPrecision(opts.digits))
    }
}

fn check_structure(cert: &DualCertificate, k_check: usize) -> Result<String, VerifyFailure> {
    let s = VerifyStep::Structure;
    if cert.n < 2 {
        return fail(s, format!("sphere dimension {} below 2", cert.n));
    }
    if k_check < 1 {
        return fail(s, "K_check must be at least 1");
    }
    if !cert.lambda.is_finite() || !cert.alpha.is_finite() {
        return fail(s, "non-finite lambda or alpha");
    }
    if cert.grid.is_empty() {
        return fail(s, "empty grid");
    }
    for (i, g) in cert.grid.iter().enumerate() {
        if !g.z.is_finite() || !(g.t >= -1.0 && g.t < 1.0) {
            return fail(s, format!("grid entry {i} malformed"));
        }
        if i > 0 && !(cert.grid[i - 1].t < g.t) {
            return fail(s, format!("grid not strictly increasing at entry {i}"));
        }
    }
    for (c, con) in cert.constraints.iter().enumerate() {
        let m = con.ineq.m;
        if m == 0 || m > MAX_ENUMERATION {
            return fail(s, format!("constraint {c} has size {m}"));
        }
        if con.ineq.z.len() != m * m || con.points.len() != m {
            return fail(s, format!("constraint {c} has inconsistent sizes"));
        }
        if !con.y.is_finite() || !con.ineq.beta.is_finite() || con.ineq.z.iter().any(|v| !v.is_finite()) {
            return fail(s, format!("constraint {c} has non-finite data"));
        }
        if con.points.iter().any(|p| p.len() != cert.n || p.iter().any(|v| !v.is_finite())) {
            return fail(s, format!("constraint {c} has points of the wrong dimension"));
        }
    }
    Ok(format!(
        "n={} grid={} constraints={} K_check={k_check}",
        cert.n,
        cert.grid.len(),
        cert.constraints.len()
    ))
}

fn verify_with<A: Arith>(
    ctx: &A,
    cert: &DualCertificate,
    opts: &VerifyOptions,
    level: VerificationLevel,
) -> Result<VerifyReport, VerifyFailure> {
    let k_check = opts.k_check.unwrap_or(cert.k_check);
    let mut steps = Vec::new();
    steps.push((VerifyStep::Structure, check_structure(cert, k_check)?));

    let mut adjustment = 0.0;
    for (c, con) in cert.constraints.iter().enumerate() {
        let (ok, worst) = validate_inequality(&con.ineq).or_else(|e| fail(VerifyStep::Inequalities, format!("constraint {c}: {e}")))?;
        if !ok {
            return fail(
                VerifyStep::Inequalities,
                format!("constraint {c}: minimum {worst} over cuts is below beta {}", con.ineq.beta),
            );
        }
        adjustment += con.y.max(0.0) * (con.ineq.beta - worst).max(0.0);
    }
    steps.push((VerifyStep::Inequalities, format!("{} inequalities valid", cert.constraints.len())));

    let mut max_rank = 0;
    for (c, con) in cert.constraints.iter().enumerate() {
        for (i, p) in con.points.iter().enumerate() {
            let r = norm(p);
            if !((r - 1.0).abs() <= UNIT_TOL) {
                return fail(VerifyStep::Placement, format!("constraint {c} point {i} has norm {r}"));
            }
        }
        let m = con.ineq.m;
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] = dot(&con.points[i], &con.points[j]);
            }
        }
        if min_eigenvalue(&gram, m) < -1e-9 {
            return fail(VerifyStep::Placement, format!("constraint {c} Gram matrix is not PSD"));
        }
        let a = nalgebra::DMatrix::from_row_slice(m, m, &gram);
        let rank = a.symmetric_eigen().eigenvalues.iter().filter(|v| **v > 1e-9).count();
        if rank > cert.n {
            return fail(VerifyStep::Placement, format!("constraint {c} Gram rank {rank} exceeds {}", cert.n));
        }
        max_rank = max_rank.max(rank);
    }
    steps.push((VerifyStep::Placement, format!("unit vectors, PSD Gram matrices, max rank {max_rank}")));

    // (t, weight) pairs whose combination gives λ + Σ z P_k − Σ y r_k.
    let basis = JacobiBasis::for_dimension(cert.n).or_else(|e| fail(VerifyStep::Transform, e.to_string()))?;
    let mut c_exact = ctx.from_f64(cert.lambda);
    let mut c_exact_f = cert.lambda;
    let mut values: Vec<(A::R, A::R)> = Vec::new();
    // interior (t, |w|) terms for the decay envelope; endpoint terms kept exact
    let mut tail_terms: Vec<(f64, f64)> = Vec::new();
    let mut endpoint = ctx.zero();
    let mut weight_l1 = 0.0;
    let minus_one = ctx.from_f64(-1.0);
    for g in &cert.grid {
        weight_l1 += g.z.abs();
        values.push((ctx.from_f64(g.t), ctx.from_f64(g.z)));
        if g.t == -1.0 {
            endpoint = ctx.sub(&endpoint, &ctx.from_f64(g.z.abs()));
        } else {
            tail_terms.push((g.t, g.z.abs()));
        }
    }
    for con in &cert.constraints {
        let m = con.ineq.m;
        let y = ctx.from_f64(con.y);
        let unit: Vec<Vec<A::R>> = con
            .points
            .iter()
            .map(|p| {
                let s = p.iter().fold(ctx.zero(), |acc, v| {
                    let v = ctx.from_f64(*v);
                    ctx.add(&acc, &ctx.mul(&v, &v))
                });
                let r = ctx.sqrt(&s);
                p.iter().map(|v| ctx.div(&ctx.from_f64(*v), &r)).collect()
            })
            .collect();
        for i in 0..m {
            let zii = ctx.from_f64(con.ineq.z(i, i));
            c_exact = ctx.sub(&c_exact, &ctx.mul(&y, &zii));
            c_exact_f -= con.y * con.ineq.z(i, i);
            for j in (i + 1)..m {
                let wf = con.ineq.z(i, j) + con.ineq.z(j, i);
                if wf == 0.0 {
                    continue;
                }
                weight_l1 += (con.y * wf).abs();
                let w = ctx.neg(&ctx.mul(&y, &ctx.add(&ctx.from_f64(con.ineq.z(i, j)), &ctx.from_f64(con.ineq.z(j, i)))));
                if con.points[i] == con.points[j] {
                    c_exact = ctx.add(&c_exact, &w);
                    c_exact_f -= con.y * wf;
                    continue;
                }
                let mut t = unit[i].iter().zip(&unit[j]).fold(ctx.zero(), |acc, (a, b)| ctx.add(&acc, &ctx.mul(a, b)));
                t = ctx.max(&ctx.from_f64(-1.0), &ctx.min(&ctx.one(), &t));
                let tf = ctx.to_f64(&t);
                if !tf.is_finite() {
                    return fail(VerifyStep::Transform, "non-finite inner product");
                }
                if ctx.cmp(&t, &minus_one) == Ordering::Equal {
                    endpoint = ctx.sub(&endpoint, &ctx.abs(&w));
                } else if ctx.cmp(&t, &ctx.one()) == Ordering::Equal {
                    endpoint = ctx.add(&endpoint, &w);
                } else {
                    tail_terms.push((tf, (con.y * wf).abs()));
                }
                values.push((t, w));
            }
        }
    }
    steps.push((VerifyStep::Transform, format!("{} Jacobi arguments to degree {k_check}", values.len())));

    if let Some(i) = cert.grid.iter().position(|g| !(g.z >= 0.0)) {
        return fail(VerifyStep::Weights, format!("grid weight {i} is negative"));
    }
    if let Some(c) = cert.constraints.iter().position(|c| !(c.y >= 0.0)) {
        return fail(VerifyStep::Weights, format!("constraint weight {c} is negative"));
    }
    let mut s = ctx.zero();
    for g in &cert.grid {
        let omt = ctx.sub(&ctx.one(), &ctx.from_f64(g.t));
        s = ctx.add(&s, &ctx.mul(&ctx.from_f64(g.z), &omt));
    }
    let s_f = ctx.to_f64(&s);
    if !((s_f - 1.0).abs() <= RENORMALIZE_TOL) {
        return fail(VerifyStep::Weights, format!("sum of z(t)(1-t) is {s_f}, not 1"));
    }
    steps.push((VerifyStep::Weights, format!("nonnegative, sum z(1-t) = 1 {:+e}", s_f - 1.0)));

    let mut obj = ctx.from_f64(cert.lambda);
    for g in &cert.grid {
        obj = ctx.add(&obj, &ctx.from_f64(g.z));
    }
    for con in &cert.constraints {
        obj = ctx.sub(&obj, &ctx.mul(&ctx.from_f64(con.y), &ctx.from_f64(con.ineq.beta)));
    }
    let obj_f = ctx.to_f64(&obj);
    if !((obj_f - cert.alpha).abs() <= IDENTITY_TOL * cert.alpha.abs().max(1.0)) {
        return fail(
            VerifyStep::Objective,
            format!("lambda + sum z - sum y beta = {obj_f} but the certificate claims {}", cert.alpha),
        );
    }
    steps.push((VerifyStep::Objective, format!("dual objective {obj_f}")));

    // S_k = c + Σ w P_k(t), all values advanced together.
    let table = basis.table(ctx, k_check);
    let mut prev: Vec<A::R> = values.iter().map(|(_, w)| w.clone()).collect();
    let mut cur: Vec<A::R> = values.iter().map(|(t, w)| ctx.mul(w, t)).collect();
    let sum = |v: &[A::R]| v.iter().fold(c_exact.clone(), |acc, x| ctx.add(&acc, x));
    let mut worst = sum(&prev);
    let mut worst_k = 0;
    let s1 = sum(&cur);
    if ctx.cmp(&s1, &worst) == Ordering::Less {
        worst = s1;
        worst_k = 1;
    }
    for j in 1..k_check {
        let (a, b) = table.coefficient(j);
        for ((t, _), (p, c)) in values.iter().zip(prev.iter_mut().zip(cur.iter_mut())) {
            let next = ctx.sub(&ctx.mul(&ctx.mul(a, t), c), &ctx.mul(b, p));
            *p = std::mem::replace(c, next);
        }
        let sk = sum(&cur);
        if ctx.cmp(&sk, &worst) == Ordering::Less {
            worst = sk;
            worst_k = j + 1;
        }
    }
    let mass = cert.lambda.abs() + c_exact_f.abs() + weight_l1;
    let kk = (k_check + 2) as f64;
    let allowance = 32.0 * kk * kk * ctx.unit_roundoff() * (1.0 + mass);
    let worst_f = ctx.to_f64(&worst);
    let bump = (-worst_f).max(0.0) + allowance;
    steps.push((
        VerifyStep::Degrees,
        format!("worst slack {worst_f:e} at k={worst_k}, lambda raised by {bump:e}"),
    ));

    let inv_s = 1.0 / s_f;
    let base = obj_f + adjustment + bump;
    let verified_bound = base * inv_s;
    let (tail, tail_bound, level) = if cert.n == 2 {
        steps.push((VerifyStep::Tail, "no decay on the circle; not applicable".into()));
        (TailOutcome::Inapplicable, None, level)
    } else {
        let nu = basis.nu();
        let k1 = k_check + 1;
        let need: f64 = tail_terms
            .iter()
            .map(|&(t, w)| w * interior_decay_bound(nu, k1, t))
            .sum();
        let fixed = ctx.add(&ctx.add(&c_exact, &ctx.from_f64(bump)), &endpoint);
        let margin = ctx.to_f64(&fixed) - need * (1.0 + 1e-12);
        if margin >= 0.0 {
            steps.push((VerifyStep::Tail, format!("envelope at k={k1} leaves margin {margin:e}")));
            let lvl = match level {
                VerificationLevel::HighPrecision(d) => VerificationLevel::TailBounded(d),
                other => other,
            };
            (TailOutcome::Certified { margin }, None, lvl)
        } else {
            steps.push((VerifyStep::Tail, format!("envelope at k={k1} short by {:e}", -margin)));
            (
                TailOutcome::Failed { deficit: -margin },
                Some((base - margin) * inv_s),
                level,
            )
        }
    };

    Ok(VerifyReport {
        verified_bound,
        claimed_bound: cert.alpha,
        level,
        k_check,
        weight_sum: s_f,
        validity_adjustment: adjustment,
        lambda_bump: bump,
        worst_degree: worst_k,
        tail,
        tail_bound,
        steps,
    })
}

/// Certificate with all grid weight at one `t` and no constraints:
/// `z = 1/(1 − t)`, `λ = z·max(0, −min_{k ≤ K} P_k(t))`.
pub fn point_mass_certificate(n: usize, t: f64, k_check: usize) -> Result<DualCertificate, GapError> {
    let basis = JacobiBasis::for_dimension(n)?;
    let z = 1.0 / (1.0 - t);
    let p = basis.eval_all(k_check, t)?;
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = z * (-lo).max(0.0);
    let mut cert = DualCertificate {
        n,
        d: 1,
        k_check,
        level: VerificationLevel::Float,
        lambda,
        alpha: 0.0,
        grid: vec![GridWeight { t, z }],
        constraints: Vec::new(),
        meta: CertMeta {
            seed: None,
            created: format!("point-mass t={}", num(t)),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    cert.alpha = cert.objective();
    Ok(cert)
}

/// The five-cycle inequality `Σ_{edges} X ≥ −3` on `m = 5` points.
pub fn pentagon_cycle_inequality() -> LinearInequality {
    let m = 5;
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        let j = (i + 1) % m;
        z[i * m + j] = 0.5;
        z[j * m + i] = 0.5;
    }
    LinearInequality {
        m,
        z,
        beta: -3.0,
        provenance: Provenance::Custom,
    }
}

/// Circle certificate at `t = cos(4π/5)`: the five-cycle inequality placed on
/// the pentagram cancels `z P_k(t)` exactly for every `k`, and the bound is
/// `8/(5(1 + cos(π/5))) = 32/(25 + 5√5)`.
pub fn pentagon_certificate(k_check: usize) -> DualCertificate {
    let th = 4.0 * std::f64::consts::PI / 5.0;
    let t = th.cos();
    let z = 1.0 / (1.0 - t);
    let points: Vec<Vec<f64>> = (0..5).map(|j| vec![(th * j as f64).cos(), (th * j as f64).sin()]).collect();
    let mut cert = DualCertificate {
        n: 2,
        d: 1,
        k_check,
        level: VerificationLevel::Float,
        lambda: 0.0,
        alpha: 0.0,
        grid: vec![GridWeight { t, z }],
        constraints: vec![CertConstraint {
            ineq: pentagon_cycle_inequality(),
            points,
            y: z / 5.0,
        }],
        meta: CertMeta {
            seed: None,
            created: "pentagon".into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    cert.alpha = cert.objective();
    cert
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tamper {
    /// One off-diagonal `Z` entry changed, breaking symmetry.
    ZEntry,
    Beta,
    Point,
    Y,
    /// Largest grid weight scaled up.
    GridWeight,
    /// `λ` changed while the claimed bound is kept.
    Lambda,
}

impl Tamper {
    pub const ALL: [Tamper; 6] = [
        Tamper::ZEntry,
        Tamper::Beta,
        Tamper::Point,
        Tamper::Y,
        Tamper::GridWeight,
        Tamper::Lambda,
    ];

    pub fn expected_step(self) -> VerifyStep {
        match self {
            Tamper::ZEntry | Tamper::Beta => VerifyStep::Inequalities,
            Tamper::Point => VerifyStep::Placement,
            Tamper::Y | Tamper::GridWeight => VerifyStep::Weights,
            Tamper::Lambda => VerifyStep::Objective,
        }
    }
}

/// Corrupts one field; `None` when the certificate has nothing to corrupt
/// (no constraints with off-diagonal entries).
pub fn tamper_certificate(cert: &DualCertificate, kind: Tamper, seed: u64) -> Option<DualCertificate> {
    use rand::Rng;
    let mut rng = sampling::substream(seed, "tamper", 0);
    let mut out = cert.clone();
    let pick_constraint = |rng: &mut rand_chacha::ChaCha8Rng| {
        if cert.constraints.is_empty() {
            None
        } else {
            Some(rng.gen_range(0..cert.constraints.len()))
        }
    };
    match kind {
        Tamper::ZEntry => {
            let c = pick_constraint(&mut rng)?;
            let m = out.constraints[c].ineq.m;
            if m < 2 {
                return None;
            }
            let i = rng.gen_range(0..m);
            let j = (i + rng.gen_range(1..m)) % m;
            out.constraints[c].ineq.z[i * m + j] += 0.5 + rng.gen::<f64>();
        }
        Tamper::Beta => {
            let c = pick_constraint(&mut rng)?;
            out.constraints[c].ineq.beta += 0.5 + rng.gen::<f64>();
        }
        Tamper::Point => {
            let c = pick_constraint(&mut rng)?;
            let m = out.constraints[c].ineq.m;
            let i = rng.gen_range(0..m);
            let f = 1.0 + 1e-3 + 0.1 * rng.gen::<f64>();
            out.constraints[c].points[i].iter_mut().for_each(|v| *v *= f);
        }
        Tamper::Y => {
            let c = pick_constraint(&mut rng)?;
            let y = out.constraints[c].y;
            out.constraints[c].y = -(y.abs() + 1e-3 * rng.gen::<f64>() + 1e-6);
        }
        Tamper::GridWeight => {
            let i = (0..out.grid.len()).max_by(|&a, &b| out.grid[a].z.total_cmp(&out.grid[b].z))?;
            out.grid[i].z *= 1.0 + 1e-3 + 0.1 * rng.gen::<f64>();
        }
        Tamper::Lambda => {
            out.lambda += 0.01 + 0.1 * rng.gen::<f64>();
        }
    }
    Some(out)
}
