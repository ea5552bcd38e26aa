//! Cut matrices, exact max-cut by enumeration, cut-polytope membership and
//! hypermetric inequalities.
//!
//! Matrices are dense, row-major. Bilinear forms are taken over all ordered
//! pairs including the diagonal: `⟨Z, X⟩ = Σ_{i,j} Z(i,j) X(i,j)`.

use crate::lpcore::{self, LinearProgram, LpError, LpStatus, RowSense, Sense, SolveOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MAX_ENUMERATION: usize = 20;
pub const MAX_EXACT_VERTICES: usize = 26;
pub const MAX_MEMBERSHIP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutError {
    #[error("{what}: size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("size must be at least 1")]
    Empty,
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix diagonal entry {0} is not 1")]
    NonUnitDiagonal(usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("hypermetric vector must have an odd sum")]
    EvenSum,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid inequality: {0}")]
    InvalidInequality(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("membership LP ended with status {0:?}")]
    LpFailed(LpStatus),
}

fn check_size(what: &'static str, size: usize, limit: usize) -> Result<(), CutError> {
    if size == 0 {
        return Err(CutError::Empty);
    }
    if size > limit {
        return Err(CutError::TooLarge { what, size, limit });
    }
    Ok(())
}

/// `f ⊗ f` for a sign vector with `f(0) = +1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutMatrix {
    signs: Vec<i8>,
}

impl CutMatrix {
    pub fn from_signs(signs: &[i8]) -> Self {
        let flip = if signs.first() == Some(&-1) { -1 } else { 1 };
        CutMatrix {
            signs: signs.iter().map(|&s| if s * flip < 0 { -1 } else { 1 }).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        f64::from(self.signs[i] * self.signs[j])
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.size();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(self.entry(i, j));
            }
        }
        out
    }
}

/// Sign vector for enumeration index `mask`: vertex `i ≥ 1` is negative iff
/// bit `i − 1` of `mask` is set.
fn signs_from_mask(m: usize, mask: u64) -> Vec<i8> {
    (0..m)
        .map(|i| if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1 } else { 1 })
        .collect()
}

pub fn enumerate_cut_matrices(m: usize) -> Result<Vec<CutMatrix>, CutError> {
    check_size("cut enumeration", m, MAX_ENUMERATION)?;
    Ok((0..1u64 << (m - 1))
        .map(|mask| CutMatrix {
            signs: signs_from_mask(m, mask),
        })
        .collect())
}

/// Symmetric nonnegative weights with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedInstance {
    n: usize,
    a: Vec<f64>,
}

impl WeightedInstance {
    pub fn empty(n: usize) -> Self {
        WeightedInstance { n, a: vec![0.0; n * n] }
    }

    pub fn from_dense(n: usize, a: Vec<f64>) -> Result<Self, CutError> {
        if a.len() != n * n {
            return Err(CutError::DimensionMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        for i in 0..n {
            if a[i * n + i] != 0.0 {
                return Err(CutError::InvalidInstance(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let w = a[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(CutError::InvalidInstance(format!("bad weight at ({i}, {j})")));
                }
                if (w - a[j * n + i]).abs() > 1e-12 * (1.0 + w.abs()) {
                    return Err(CutError::NotSymmetric(i, j));
                }
            }
        }
        Ok(WeightedInstance { n, a })
    }

    /// Sets `A(i,j) = A(j,i) = w`.
    pub fn set(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j && w >= 0.0 && w.is_finite());
        self.a[i * self.n + j] = w;
        self.a[j * self.n + i] = w;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn dense(&self) -> &[f64] {
        &self.a
    }

    /// `Σ_{x,y} A(x,y)`.
    pub fn total(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> WeightedInstance {
        WeightedInstance {
            n: self.n,
            a: self.a.iter().map(|w| w * c).collect(),
        }
    }

    pub fn cycle(n: usize) -> WeightedInstance {
        let mut g = WeightedInstance::empty(n);
        for i in 0..n {
            g.set(i, (i + 1) % n, 1.0);
        }
        g
    }

    pub fn to_file(&self, dim_hint: Option<usize>) -> InstanceFile {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = self.weight(i, j);
                if w != 0.0 {
                    edges.push(Edge { i, j, w });
                }
            }
        }
        InstanceFile {
            n_vertices: self.n,
            dim_hint,
            edges,
        }
    }

    pub fn from_file(f: &InstanceFile) -> Result<Self, CutError> {
        let mut g = WeightedInstance::empty(f.n_vertices);
        for e in &f.edges {
            if e.i >= f.n_vertices || e.j >= f.n_vertices || e.i == e.j {
                return Err(CutError::InvalidInstance(format!("bad edge ({}, {})", e.i, e.j)));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(CutError::InvalidInstance(format!("bad weight {}", e.w)));
            }
            g.set(e.i, e.j, e.w);
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// On-disk instance: `A(i,j) = A(j,i) = w` for every listed edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n_vertices: usize,
    #[serde(default)]
    pub dim_hint: Option<usize>,
    pub edges: Vec<Edge>,
}

/// `Σ_{x,y} A(x,y)(1 − f(x)f(y))`.
pub fn cut_value(a: &WeightedInstance, f: &[i8]) -> f64 {
    let n = a.n;
    let mut v = 0.0;
    for x in 0..n {
        for y in 0..n {
            if f[x] != f[y] {
                v += 2.0 * a.a[x * n + y];
            }
        }
    }
    v
}

/// Gray-code walk over the sign patterns of `vars` (the low `free` vertices
/// after vertex 0 and before the fixed block), maximizing or minimizing a
/// quadratic form `Σ_{x≠y} W(x,y) f(x) f(y)`.
///
/// Returns `(best form value, best signs)`.
fn gray_walk(w: &[f64], n: usize, start: Vec<i8>, free: usize, maximize: bool) -> (f64, Vec<i8>) {
    let mut f = start;
    // s_v = f_v Σ_u W(u,v) f_u; flipping v changes the form by −4 s_v
    let form = |f: &[i8]| -> f64 {
        let mut q = 0.0;
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    q += w[x * n + y] * f64::from(f[x] * f[y]);
                }
            }
        }
        q
    };
    let local = |f: &[i8], v: usize| -> f64 {
        let mut s = 0.0;
        for u in 0..n {
            if u != v {
                s += (w[u * n + v] + w[v * n + u]) * f64::from(f[u]);
            }
        }
        s * f64::from(f[v])
    };
    let mut q = form(&f);
    let mut s: Vec<f64> = (0..n).map(|v| local(&f, v)).collect();
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best = q;
    let mut best_f = f.clone();
    let steps: u64 = 1 << free;
    for step in 1..steps {
        let v = 1 + step.trailing_zeros() as usize;
        // flipping f_v changes q by −2 s_v
        q -= 2.0 * s[v];
        let fv_old = f64::from(f[v]);
        for u in 0..n {
            if u != v {
                s[u] -= 2.0 * f64::from(f[u]) * (w[u * n + v] + w[v * n + u]) * fv_old;
            }
        }
        s[v] = -s[v];
        f[v] = -f[v];
        if step % 65_536 == 0 {
            q = form(&f);
            s = (0..n).map(|v| local(&f, v)).collect();
        }
        if better(q, best) {
            best = q;
            best_f.clone_from(&f);
        }
    }
    (form(&best_f), best_f)
}

/// Optimizes a quadratic form over all sign vectors with `f(0) = +1`,
/// splitting the search space over the highest free vertices.
fn optimize_signs(w: &[f64], n: usize, maximize: bool) -> (f64, Vec<i8>) {
    if n <= 1 {
        return (0.0, vec![1; n]);
    }
    let free_total = n - 1;
    let split = if free_total > 12 { 6 } else { 0 };
    let free = free_total - split;
    let results: Vec<(f64, Vec<i8>)> = (0..1u64 << split)
        .into_par_iter()
        .map(|chunk| {
            let mut start = vec![1i8; n];
            for b in 0..split {
                if (chunk >> b) & 1 == 1 {
                    start[1 + free + b] = -1;
                }
            }
            gray_walk(w, n, start, free, maximize)
        })
        .collect();
    let mut best = results[0].clone();
    for r in results.into_iter().skip(1) {
        if (maximize && r.0 > best.0) || (!maximize && r.0 < best.0) {
            best = r;
        }
    }
    best
}

/// Exact `sdp₁(A) = max_f Σ A(x,y)(1 − f(x)f(y))`, which is four times the
/// maximum cut weight.
pub fn max_cut_exact(a: &WeightedInstance) -> Result<(f64, Vec<i8>), CutError> {
    check_size("exact max-cut", a.n.max(1), MAX_EXACT_VERTICES)?;
    if a.n == 0 {
        return Ok((0.0, Vec::new()));
    }
    // maximize Σ A(1 − ff) ⟺ minimize Σ_{x≠y} A f f
    let (_, f) = optimize_signs(&a.a, a.n, false);
    Ok((cut_value(a, &f), f))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Triangle,
    Hypermetric(Vec<i64>),
    Custom,
    /// Produced by a failed membership test.
    Separation,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Triangle => write!(f, "triangle"),
            Provenance::Custom => write!(f, "custom"),
            Provenance::Separation => write!(f, "separation"),
            Provenance::Hypermetric(b) => {
                let parts: Vec<String> = b.iter().map(i64::to_string).collect();
                write!(f, "hypermetric({})", parts.join(","))
            }
        }
    }
}

impl FromStr for Provenance {
    type Err = CutError;
    fn from_str(s: &str) -> Result<Self, CutError> {
        match s {
            "triangle" => Ok(Provenance::Triangle),
            "custom" => Ok(Provenance::Custom),
            "separation" => Ok(Provenance::Separation),
            _ => {
                let inner = s
                    .strip_prefix("hypermetric(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| CutError::InvalidInequality(format!("unknown provenance {s}")))?;
                let b = inner
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CutError::InvalidInequality(format!("bad provenance {s}")))?;
                Ok(Provenance::Hypermetric(b))
            }
        }
    }
}

/// `⟨Z, X⟩ ≥ β` for all cut matrices `X` of size `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearInequality {
    pub m: usize,
    /// Row-major, symmetric.
    pub z: Vec<f64>,
    pub beta: f64,
    pub provenance: Provenance,
}

impl LinearInequality {
    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.z[i * self.m + j]
    }

    /// `⟨Z, X⟩` for a dense `X`.
    pub fn pair(&self, x: &[f64]) -> f64 {
        self.z.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Checks shape, finiteness and symmetry.
    pub fn check_structure(&self) -> Result<(), CutError> {
        if self.m == 0 {
            return Err(CutError::Empty);
        }
        if self.z.len() != self.m * self.m {
            return Err(CutError::DimensionMismatch {
                expected: self.m * self.m,
                got: self.z.len(),
            });
        }
        if !self.beta.is_finite() || self.z.iter().any(|v| !v.is_finite()) {
            return Err(CutError::InvalidInequality("non-finite coefficient".into()));
        }
        for i in 0..self.m {
            for j in 0..i {
                let (a, b) = (self.z(i, j), self.z(j, i));
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(CutError::NotSymmetric(i, j));
                }
            }
        }
        Ok(())
    }
}

/// `Σ_{i<j} b_i b_j X(i,j) ≥ (1 − Σ b_i²)/2`, stored with
/// `Z(i,j) = b_i b_j / 2` off the diagonal and a zero diagonal.
pub fn hypermetric_inequality(b: &[i64]) -> Result<LinearInequality, CutError> {
    check_size("hypermetric vector", b.len(), MAX_ENUMERATION)?;
    if b.iter().any(|&v| v == 0) {
        return Err(CutError::InvalidInequality("hypermetric entries must be nonzero".into()));
    }
    let sum: i64 = b.iter().sum();
    if sum.rem_euclid(2) == 0 {
        return Err(CutError::EvenSum);
    }
    let m = b.len();
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                z[i * m + j] = (b[i] * b[j]) as f64 / 2.0;
            }
        }
    }
    let sq: i64 = b.iter().map(|v| v * v).sum();
    let provenance = if m == 3 {
        Provenance::Triangle
    } else {
        Provenance::Hypermetric(b.to_vec())
    };
    Ok(LinearInequality {
        m,
        z,
        beta: (1 - sq) as f64 / 2.0,
        provenance,
    })
}

/// Brute-force `min_X ⟨Z, X⟩`; valid iff the minimum is at least `β − 1e−12`.
pub fn validate_inequality(ineq: &LinearInequality) -> Result<(bool, f64), CutError> {
    check_size("inequality validation", ineq.m, MAX_ENUMERATION)?;
    ineq.check_structure()?;
    let m = ineq.m;
    let diag: f64 = (0..m).map(|i| ineq.z(i, i)).sum();
    let (off, _) = optimize_signs(&ineq.z, m, false);
    let worst = diag + off;
    Ok((worst >= ineq.beta - 1e-12, worst))
}

#[derive(Clone, Debug)]
pub enum Membership {
    /// Convex weights over `enumerate_cut_matrices(m)`, as `(index, weight)`.
    Member { weights: Vec<(usize, f64)>, residual: f64 },
    /// `⟨Z, M⟩ < β ≤ ⟨Z, X⟩` for every cut matrix `X`.
    Separated { inequality: LinearInequality, value_at_m: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Tests whether a unit-diagonal symmetric `M` lies in the cut polytope by an
/// LP over cut-matrix weights with L1 slack; the dual yields a separator.
pub fn membership_lp(mat: &[f64], m: usize) -> Result<Membership, CutError> {
    check_size("membership LP", m, MAX_MEMBERSHIP)?;
    if mat.len() != m * m {
        return Err(CutError::DimensionMismatch {
            expected: m * m,
            got: mat.len(),
        });
    }
    for i in 0..m {
        if (mat[i * m + i] - 1.0).abs() > 1e-9 {
            return Err(CutError::NonUnitDiagonal(i));
        }
        for j in 0..i {
            if (mat[i * m + j] - mat[j * m + i]).abs() > 1e-12 {
                return Err(CutError::NotSymmetric(i, j));
            }
        }
    }
    let cuts = enumerate_cut_matrices(m)?;
    if m == 1 {
        return Ok(Membership::Member {
            weights: vec![(0, 1.0)],
            residual: 0.0,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let lam: Vec<usize> = (0..cuts.len())
        .map(|k| lp.add_var(0.0, f64::INFINITY, 0.0, format!("l{k}")))
        .collect();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let sp = lp.add_var(0.0, f64::INFINITY, 1.0, format!("sp{p}"));
        let sm = lp.add_var(0.0, f64::INFINITY, 1.0, format!("sm{p}"));
        let mut row: Vec<(usize, f64)> = cuts.iter().zip(&lam).map(|(c, &l)| (l, c.entry(i, j))).collect();
        row.push((sp, 1.0));
        row.push((sm, -1.0));
        lp.add_row(row, RowSense::Eq, mat[i * m + j], format!("p{i}_{j}"));
    }
    lp.add_row(lam.iter().map(|&l| (l, 1.0)).collect(), RowSense::Eq, 1.0, "convex");
    let sol = lpcore::solve(&lp, &SolveOptions::default())?;
    if sol.status != LpStatus::Optimal {
        return Err(CutError::LpFailed(sol.status));
    }
    if sol.objective <= 1e-9 {
        let weights: Vec<(usize, f64)> = lam
            .iter()
            .enumerate()
            .filter(|(_, &l)| sol.primal[l] > 1e-15)
            .map(|(k, &l)| (k, sol.primal[l]))
            .collect();
        let mut residual = 0.0f64;
        for &(i, j) in &pairs {
            let s: f64 = weights.iter().map(|&(k, w)| w * cuts[k].entry(i, j)).sum();
            residual = residual.max((s - mat[i * m + j]).abs());
        }
        return Ok(Membership::Member { weights, residual });
    }
    // separator: Z = −y/2 on the pair rows, β = min over cuts
    let mut z = vec![0.0; m * m];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        z[i * m + j] = -sol.dual[p] / 2.0;
        z[j * m + i] = -sol.dual[p] / 2.0;
    }
    let mut ineq = LinearInequality {
        m,
        z,
        beta: 0.0,
        provenance: Provenance::Separation,
    };
    let (_, worst) = validate_inequality(&ineq)?;
    ineq.beta = worst;
    let value_at_m = ineq.pair(mat);
    if value_at_m >= ineq.beta - 1e-12 {
        return Err(CutError::LpFailed(LpStatus::NumericalFailure));
    }
    Ok(Membership::Separated {
        inequality: ineq,
        value_at_m,
    })
}

/// Named inequality families used by the separation search.
#[derive(Clone, Debug, PartialEq)]
pub enum InequalityFamily {
    Triangle,
    Pentagonal,
    Hypermetric7,
    Custom(Vec<LinearInequality>),
}

impl InequalityFamily {
    pub fn parse(name: &str) -> Option<InequalityFamily> {
        match name {
            "triangle" => Some(InequalityFamily::Triangle),
            "pentagonal" => Some(InequalityFamily::Pentagonal),
            "hypermetric7" => Some(InequalityFamily::Hypermetric7),
            _ => None,
        }
    }

    /// `±1` hypermetric vectors up to permutation and global sign.
    fn sign_vectors(m: usize) -> Vec<Vec<i64>> {
        (0..=m / 2)
            .map(|neg| (0..m).map(|i| if i < m - neg { 1 } else { -1 }).collect())
            .collect()
    }

    pub fn inequalities(&self) -> Vec<LinearInequality> {
        let from = |m: usize| {
            Self::sign_vectors(m)
                .iter()
                .map(|b| hypermetric_inequality(b).expect("odd-length sign vectors have odd sums"))
                .collect()
        };
        match self {
            InequalityFamily::Triangle => from(3),
            InequalityFamily::Pentagonal => from(5),
            InequalityFamily::Hypermetric7 => from(7),
            InequalityFamily::Custom(list) => list.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CustomInequalityRecord {
    pub m: usize,
    #[serde(rename = "Z")]
    pub z: Vec<f64>,
    pub beta: f64,
}

/// Parses a JSON list of `{m, Z, beta}` and validates every entry.
pub fn parse_custom_inequalities(json: &str) -> Result<Vec<LinearInequality>, CutError> {
    let recs: Vec<CustomInequalityRecord> =
        serde_json::from_str(json).map_err(|e| CutError::InvalidInequality(e.to_string()))?;
    recs.into_iter()
        .enumerate()
        .map(|(k, r)| {
            let ineq = LinearInequality {
                m: r.m,
                z: r.z,
                beta: r.beta,
                provenance: Provenance::Custom,
            };
            let (ok, worst) = validate_inequality(&ineq)?;
            if !ok {
                return Err(CutError::InvalidInequality(format!(
                    "entry {k} is not valid: minimum {worst} below beta {}",
                    ineq.beta
                )));
            }
            Ok(ineq)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_cut_matrices(1).unwrap()[0].to_dense(), vec![1.0]);
        let two = enumerate_cut_matrices(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].to_dense(), vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(two[1].to_dense(), vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(enumerate_cut_matrices(3).unwrap().len(), 4);
        assert!(matches!(enumerate_cut_matrices(21), Err(CutError::TooLarge { .. })));
    }

    #[test]
    fn max_cut_examples() {
        let mut edge = WeightedInstance::empty(2);
        edge.set(0, 1, 1.0);
        let (v, f) = max_cut_exact(&edge).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(f, vec![1, -1]);
        assert_eq!(max_cut_exact(&WeightedInstance::cycle(5)).unwrap().0, 16.0);
        assert_eq!(max_cut_exact(&WeightedInstance::empty(6)).unwrap().0, 0.0);
        assert!(max_cut_exact(&WeightedInstance::empty(27)).is_err());
    }

    #[test]
    fn max_cut_large_uses_split_search() {
        // complete bipartite K_{8,8}: all 64 edges cut
        let mut g = WeightedInstance::empty(16);
        for i in 0..8 {
            for j in 8..16 {
                g.set(i, j, 1.0);
            }
        }
        assert_eq!(max_cut_exact(&g).unwrap().0, 4.0 * 64.0);
    }

    #[test]
    fn membership_examples() {
        let m2 = [1.0, 0.0, 0.0, 1.0];
        match membership_lp(&m2, 2).unwrap() {
            Membership::Member { weights, .. } => {
                assert_eq!(weights.len(), 2);
                for (_, w) in weights {
                    assert_abs_diff_eq!(w, 0.5, epsilon = 1e-9);
                }
            }
            other => panic!("{other:?}"),
        }
        let t = -1.0 / 3.0;
        let m3 = [1.0, t, t, t, 1.0, t, t, t, 1.0];
        assert!(membership_lp(&m3, 3).unwrap().is_member());
        let t = -0.4;
        let m3 = [1.0, t, t, t, 1.0, t, t, t, 1.0];
        match membership_lp(&m3, 3).unwrap() {
            Membership::Separated { inequality, value_at_m } => {
                assert!(value_at_m < inequality.beta);
                assert!(validate_inequality(&inequality).unwrap().0);
                // the separator is a positive multiple of X12 + X13 + X23 ≥ −1
                let s = inequality.z(0, 1);
                assert!(s > 0.0);
                assert_abs_diff_eq!(inequality.z(0, 2), s, epsilon = 1e-9);
                assert_abs_diff_eq!(inequality.beta, -2.0 * s, epsilon = 1e-9);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(membership_lp(&[2.0, 0.0, 0.0, 1.0], 2), Err(CutError::NonUnitDiagonal(0))));
        assert!(membership_lp(&[1.0; 3], 2).is_err());
    }

    #[test]
    fn hypermetric_examples() {
        let tri = hypermetric_inequality(&[1, 1, -1]).unwrap();
        assert_eq!(tri.provenance, Provenance::Triangle);
        assert_eq!(tri.z(0, 1), 0.5);
        assert_eq!(tri.z(0, 2), -0.5);
        assert_eq!(tri.z(1, 2), -0.5);
        assert_eq!(tri.beta, -1.0);
        assert_eq!(hypermetric_inequality(&[1, 1, 1, -1, -1]).unwrap().beta, -2.0);
        assert_eq!(hypermetric_inequality(&[1, 1, 1, 1, 1, -1, -1]).unwrap().beta, -3.0);
        assert_eq!(hypermetric_inequality(&[1, 1]).unwrap_err(), CutError::EvenSum);
    }

    #[test]
    fn validation_examples() {
        let tri = hypermetric_inequality(&[1, 1, -1]).unwrap();
        assert_eq!(validate_inequality(&tri).unwrap(), (true, -1.0));
        let pent = hypermetric_inequality(&[1, 1, 1, -1, -1]).unwrap();
        assert_eq!(validate_inequality(&pent).unwrap(), (true, -2.0));
        let mut bogus = tri.clone();
        bogus.beta = -0.5;
        assert_eq!(validate_inequality(&bogus).unwrap(), (false, -1.0));
        let mut asym = tri;
        asym.z[1] += 0.1;
        assert!(matches!(validate_inequality(&asym), Err(CutError::NotSymmetric(..))));
    }

    #[test]
    fn families_are_valid_and_distinct() {
        for fam in [InequalityFamily::Triangle, InequalityFamily::Pentagonal, InequalityFamily::Hypermetric7] {
            let list = fam.inequalities();
            assert!(!list.is_empty());
            for ineq in list {
                assert!(validate_inequality(&ineq).unwrap().0);
            }
        }
        assert_eq!(InequalityFamily::Hypermetric7.inequalities().len(), 4);
    }

    #[test]
    fn provenance_roundtrip() {
        for p in [
            Provenance::Triangle,
            Provenance::Custom,
            Provenance::Separation,
            Provenance::Hypermetric(vec![1, 1, 1, -1, -1]),
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
        assert!("bogus".parse::<Provenance>().is_err());
    }

    #[test]
    fn custom_file_parsing() {
        let ok = r#"[{"m": 3, "Z": [0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0], "beta": -1}]"#;
        let list = parse_custom_inequalities(ok).unwrap();
        assert_eq!(list[0].provenance, Provenance::Custom);
        let bad = r#"[{"m": 3, "Z": [0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0], "beta": 0}]"#;
        assert!(parse_custom_inequalities(bad).is_err());
        assert!(parse_custom_inequalities("{").is_err());
    }

    #[test]
    fn instance_file_roundtrip() {
        let g = WeightedInstance::cycle(5);
        let f = g.to_file(Some(2));
        let json = serde_json::to_string(&f).unwrap();
        let back: InstanceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(WeightedInstance::from_file(&back).unwrap(), g);
        let bad = InstanceFile {
            n_vertices: 2,
            dim_hint: None,
            edges: vec![Edge { i: 0, j: 5, w: 1.0 }],
        };
        assert!(WeightedInstance::from_file(&bad).is_err());
    }
}
