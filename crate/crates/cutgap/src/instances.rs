//! Bad max-cut instances from dual certificates.
//!
//! The sphere is split into cells; cells become vertices and the weight of a
//! pair of cells is `A_z(X, Y) = Σ_t z(t) Pr[Tu ∈ X, Tv_t ∈ Y]` for Haar
//! random `T` and fixed `u·v_t = t`. The ratio of the exact max-cut value to
//! the best rank-`n` embedding found tracks the integrality gap as the
//! partition is refined.

use crate::cutpoly::{cut_value, max_cut_exact, CutError, WeightedInstance, MAX_EXACT_VERTICES};
use crate::gapbound::DualCertificate;
use crate::kernels::CellLocator;
use crate::sampling::{self, arc_overlap, dot, gaussian_vector, norm, random_unit, wrap_angle, TAU};
use rand::Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

pub const MIN_AZ_SAMPLES: usize = 10_000;
pub const NESTING_SCHEME: &str = "split-largest";
const DIAMETER_SAMPLES: usize = 20_000;
const AZ_CHUNK: usize = 1 << 13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("vector {index} has norm {norm}, not 1")]
    NonUnit { index: usize, norm: f64 },
    #[error("certificate has no grid weight")]
    NoWeight,
}

#[derive(Clone, Debug)]
struct Level {
    reps: Vec<Vec<f64>>,
    /// Parent cell in the previous level.
    parent: Vec<usize>,
}

/// Nested partition of `S^{n−1}`.
///
/// On the circle every cell is one arc. In higher dimensions the first level
/// is the Voronoi diagram of repulsion-polished points and each refinement
/// splits a cell by a Voronoi split between two child representatives, so a
/// point is located by descending the levels.
#[derive(Clone, Debug)]
pub struct SpherePartition {
    n: usize,
    levels: Vec<Level>,
    arcs: Option<Vec<(f64, f64)>>,
    diameter: f64,
}

impl SpherePartition {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.levels.last().map_or(0, |l| l.reps.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn representatives(&self) -> &[Vec<f64>] {
        &self.levels.last().expect("partition has a level").reps
    }

    /// Parent of each cell in the partition this one refined.
    pub fn parents(&self) -> Option<&[usize]> {
        (self.levels.len() > 1).then(|| self.levels.last().expect("level").parent.as_slice())
    }

    /// `(start, length)` of every cell on the circle.
    pub fn cell_arcs(&self) -> Option<&[(f64, f64)]> {
        self.arcs.as_deref()
    }

    /// Largest cell diameter: exact chords on the circle, sampled otherwise.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn nesting_scheme(&self) -> &'static str {
        NESTING_SCHEME
    }

    pub fn locate(&self, x: &[f64]) -> usize {
        if let Some(arcs) = &self.arcs {
            let a = wrap_angle(sampling::angle_of(x));
            return arcs
                .iter()
                .position(|&(s, l)| wrap_angle(a - s) < l)
                .unwrap_or_else(|| nearest_arc(arcs, a));
        }
        let mut cell = nearest(&self.levels[0].reps, x, |_| true);
        for lv in &self.levels[1..] {
            cell = nearest(&lv.reps, x, |c| lv.parent[c] == cell);
        }
        cell
    }

    /// Refines to `m_cells` by splitting the largest cells, lowest index
    /// first among equals. Children of cell `c` keep a parent link to `c`.
    pub fn refine(&self, m_cells: usize, seed: u64) -> Result<SpherePartition, InstanceError> {
        let m = self.len();
        if m_cells < m {
            return Err(InstanceError::BadParameter(format!("cannot refine {m} cells into {m_cells}")));
        }
        if let Some(arcs) = &self.arcs {
            // (start, len, parent)
            let mut cells: Vec<(f64, f64, usize)> = arcs.iter().enumerate().map(|(i, &(s, l))| (s, l, i)).collect();
            while cells.len() < m_cells {
                let big = (0..cells.len())
                    .max_by(|&a, &b| cells[a].1.total_cmp(&cells[b].1).then(b.cmp(&a)))
                    .expect("nonempty");
                let (s, l, p) = cells[big];
                cells[big] = (s, l / 2.0, p);
                cells.insert(big + 1, (wrap_angle(s + l / 2.0), l / 2.0, p));
            }
            let arcs: Vec<(f64, f64)> = cells.iter().map(|c| (c.0, c.1)).collect();
            let mut levels = self.levels.clone();
            levels.push(Level {
                reps: arcs.iter().map(|&(s, l)| arc_midpoint(s, l)).collect(),
                parent: cells.iter().map(|c| c.2).collect(),
            });
            return Ok(SpherePartition {
                n: 2,
                diameter: arc_diameter(&arcs),
                levels,
                arcs: Some(arcs),
            });
        }
        let mut rng = sampling::substream(seed, "refine", m_cells as u64);
        let pts: Vec<Vec<f64>> = (0..DIAMETER_SAMPLES).map(|_| random_unit(&mut rng, self.n)).collect();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (i, p) in pts.iter().enumerate() {
            members[self.locate(p)].push(i);
        }
        // each entry: (representative, parent, sample indices)
        let mut cells: Vec<(Vec<f64>, usize, Vec<usize>)> = self
            .representatives()
            .iter()
            .cloned()
            .zip(members)
            .enumerate()
            .map(|(i, (r, mem))| (r, i, mem))
            .collect();
        while cells.len() < m_cells {
            let big = (0..cells.len())
                .max_by(|&a, &b| cells[a].2.len().cmp(&cells[b].2.len()).then(b.cmp(&a)))
                .expect("nonempty");
            let (rep, parent, mem) = cells[big].clone();
            let (c1, c2) = two_means(&pts, &mem, &rep, &mut rng);
            let (m1, m2): (Vec<usize>, Vec<usize>) = mem.iter().partition(|&&i| dot(&pts[i], &c1) >= dot(&pts[i], &c2));
            cells[big] = (c1, parent, m1);
            cells.insert(big + 1, (c2, parent, m2));
        }
        let mut levels = self.levels.clone();
        levels.push(Level {
            reps: cells.iter().map(|c| c.0.clone()).collect(),
            parent: cells.iter().map(|c| c.1).collect(),
        });
        let mut out = SpherePartition {
            n: self.n,
            levels,
            arcs: None,
            diameter: 0.0,
        };
        out.diameter = sampled_diameter(&out, seed);
        Ok(out)
    }
}

impl CellLocator for SpherePartition {
    fn dimension(&self) -> usize {
        self.n
    }

    fn cell_count(&self) -> usize {
        self.len()
    }

    fn locate(&self, x: &[f64]) -> usize {
        SpherePartition::locate(self, x)
    }

    fn arcs(&self) -> Option<Vec<Vec<(f64, f64)>>> {
        self.arcs.as_ref().map(|a| a.iter().map(|&c| vec![c]).collect())
    }
}

fn nearest(reps: &[Vec<f64>], x: &[f64], allowed: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    let mut bd = f64::NEG_INFINITY;
    for (i, r) in reps.iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        let d = dot(r, x);
        if d > bd {
            bd = d;
            best = i;
        }
    }
    best
}

fn nearest_arc(arcs: &[(f64, f64)], a: f64) -> usize {
    (0..arcs.len())
        .min_by(|&i, &j| {
            let d = |k: usize| wrap_angle(a - arcs[k].0).min(TAU - wrap_angle(a - arcs[k].0));
            d(i).total_cmp(&d(j))
        })
        .expect("nonempty")
}

fn arc_midpoint(s: f64, l: f64) -> Vec<f64> {
    let a = s + l / 2.0;
    vec![a.cos(), a.sin()]
}

fn arc_diameter(arcs: &[(f64, f64)]) -> f64 {
    arcs.iter()
        .map(|&(_, l)| if l >= std::f64::consts::PI { 2.0 } else { 2.0 * (l / 2.0).sin() })
        .fold(0.0, f64::max)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let r = norm(&v);
    v.iter_mut().for_each(|e| *e /= r);
    v
}

fn two_means<R: Rng>(pts: &[Vec<f64>], mem: &[usize], rep: &[f64], rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let n = rep.len();
    if mem.len() < 2 {
        // empty cell: split around the representative
        let mut g = gaussian_vector(rng, n);
        let p = dot(&g, rep);
        g.iter_mut().zip(rep).for_each(|(a, b)| *a -= p * b);
        let g = normalized(g);
        let a = normalized(rep.iter().zip(&g).map(|(r, e)| r + 1e-3 * e).collect());
        let b = normalized(rep.iter().zip(&g).map(|(r, e)| r - 1e-3 * e).collect());
        return (a, b);
    }
    // farthest-point seeding, then spherical Lloyd iterations
    let far = |from: &[f64]| {
        *mem.iter()
            .min_by(|&&i, &&j| dot(&pts[i], from).total_cmp(&dot(&pts[j], from)))
            .expect("nonempty")
    };
    let mut c1 = pts[far(rep)].clone();
    let mut c2 = pts[far(&c1)].clone();
    for _ in 0..30 {
        let mut s1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        for &i in mem {
            let s = if dot(&pts[i], &c1) >= dot(&pts[i], &c2) { &mut s1 } else { &mut s2 };
            s.iter_mut().zip(&pts[i]).for_each(|(a, b)| *a += b);
        }
        if norm(&s1) == 0.0 || norm(&s2) == 0.0 {
            break;
        }
        c1 = normalized(s1);
        c2 = normalized(s2);
    }
    (c1, c2)
}

fn repulsion_points(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = sampling::substream(seed, "partition", m as u64);
    let mut pts: Vec<Vec<f64>> = (0..m).map(|_| random_unit(&mut rng, n)).collect();
    let step0 = 1.0 / (m as f64).sqrt();
    for it in 0..400 {
        let step = step0 / (1.0 + it as f64 / 10.0);
        let forces: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut f = vec![0.0; n];
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let d: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
                    let r2 = dot(&d, &d).max(1e-12);
                    let s = 1.0 / (r2 * r2.sqrt());
                    f.iter_mut().zip(&d).for_each(|(a, b)| *a += s * b);
                }
                f
            })
            .collect();
        for (p, f) in pts.iter_mut().zip(&forces) {
            let radial = dot(p, f);
            let tangent: Vec<f64> = f.iter().zip(p.iter()).map(|(a, b)| a - radial * b).collect();
            let r = norm(f);
            if r > 1e-300 {
                let moved: Vec<f64> = p.iter().zip(&tangent).map(|(a, b)| a + step * b / r).collect();
                *p = normalized(moved);
            }
        }
    }
    pts
}

fn sampled_diameter(p: &SpherePartition, seed: u64) -> f64 {
    let mut rng = sampling::substream(seed, "diameter", p.len() as u64);
    let mut members: Vec<Vec<Vec<f64>>> = vec![Vec::new(); p.len()];
    for _ in 0..DIAMETER_SAMPLES {
        let x = random_unit(&mut rng, p.n);
        members[p.locate(&x)].push(x);
    }
    members
        .par_iter()
        .map(|pts| {
            let mut best: f64 = 0.0;
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    best = best.max(2.0 - 2.0 * dot(&pts[i], &pts[j]));
                }
            }
            best.max(0.0).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Equal arcs on the circle, repulsion-polished Voronoi cells otherwise.
pub fn build_partition(n: usize, m_cells: usize, seed: u64) -> Result<SpherePartition, InstanceError> {
    if n < 2 {
        return Err(InstanceError::BadParameter(format!("sphere dimension {n} below 2")));
    }
    if m_cells < 2 {
        return Err(InstanceError::BadParameter("need at least 2 cells".into()));
    }
    if n == 2 {
        let l = TAU / m_cells as f64;
        let arcs: Vec<(f64, f64)> = (0..m_cells).map(|i| (l * i as f64, l)).collect();
        return Ok(SpherePartition {
            n,
            levels: vec![Level {
                reps: arcs.iter().map(|&(s, l)| arc_midpoint(s, l)).collect(),
                parent: (0..m_cells).collect(),
            }],
            diameter: arc_diameter(&arcs),
            arcs: Some(arcs),
        });
    }
    let mut p = SpherePartition {
        n,
        levels: vec![Level {
            reps: repulsion_points(n, m_cells, seed),
            parent: (0..m_cells).collect(),
        }],
        arcs: None,
        diameter: 0.0,
    };
    p.diameter = sampled_diameter(&p, seed);
    Ok(p)
}

/// Partitions for an ascending list of sizes, each refining the previous.
pub fn nested_partitions(n: usize, m_list: &[usize], seed: u64) -> Result<Vec<SpherePartition>, InstanceError> {
    let mut out: Vec<SpherePartition> = Vec::with_capacity(m_list.len());
    for (i, &m) in m_list.iter().enumerate() {
        let p = match out.last() {
            None => build_partition(n, m, seed)?,
            Some(prev) => prev.refine(m, sampling_seed(seed, i))?,
        };
        out.push(p);
    }
    Ok(out)
}

fn sampling_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Unit vectors indexed by vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(InstanceError::BadParameter(format!("vector {index} has dimension {}", v.len())));
            }
            let r = norm(v);
            if !((r - 1.0).abs() <= 1e-9) {
                return Err(InstanceError::NonUnit { index, norm: r });
            }
        }
        Ok(Embedding { dim, vectors })
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        Embedding {
            dim: 1,
            vectors: signs.iter().map(|&s| vec![if s < 0 { -1.0 } else { 1.0 }]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Same vectors with zero coordinates appended.
    pub fn padded(&self, dim: usize) -> Embedding {
        Embedding {
            dim: dim.max(self.dim),
            vectors: self
                .vectors
                .iter()
                .map(|v| {
                    let mut w = v.clone();
                    w.resize(dim.max(self.dim), 0.0);
                    w
                })
                .collect(),
        }
    }

    /// Vectors for a refined partition: every child copies its parent.
    pub fn lifted(&self, parents: &[usize]) -> Embedding {
        Embedding {
            dim: self.dim,
            vectors: parents.iter().map(|&p| self.vectors[p].clone()).collect(),
        }
    }
}

/// `Σ A(x,y)(1 − f(x)·f(y))`.
pub fn embedding_value(a: &WeightedInstance, e: &Embedding) -> f64 {
    let n = a.n();
    let mut v = 0.0;
    for x in 0..n {
        for y in 0..n {
            let w = a.weight(x, y);
            if w != 0.0 {
                v += w * (1.0 - dot(&e.vectors[x], &e.vectors[y]));
            }
        }
    }
    v
}

#[derive(Clone, Debug)]
pub struct HeuristicResult {
    pub value: f64,
    pub embedding: Embedding,
    /// Objective after each sweep of the best run.
    pub sweeps: Vec<f64>,
}

fn ascend(a: &WeightedInstance, mut e: Embedding, sweeps: usize) -> HeuristicResult {
    let n = a.n();
    let mut history = vec![embedding_value(a, &e)];
    for _ in 0..sweeps {
        for x in 0..n {
            let mut w = vec![0.0; e.dim];
            for y in 0..n {
                let c = a.weight(x, y) + a.weight(y, x);
                if c != 0.0 {
                    w.iter_mut().zip(&e.vectors[y]).for_each(|(s, v)| *s += c * v);
                }
            }
            let r = norm(&w);
            if r > 0.0 {
                e.vectors[x] = w.iter().map(|v| -v / r).collect();
            }
        }
        let v = embedding_value(a, &e);
        let prev = *history.last().expect("nonempty");
        history.push(v);
        if v - prev <= 1e-14 * (1.0 + v.abs()) {
            break;
        }
    }
    HeuristicResult {
        value: *history.last().expect("nonempty"),
        embedding: e,
        sweeps: history,
    }
}

fn better(a: HeuristicResult, b: HeuristicResult) -> HeuristicResult {
    if b.value > a.value {
        b
    } else {
        a
    }
}

/// Best rank-`n` embedding found by block coordinate ascent, a lower bound
/// on `sdp_n(A)`. Runs dimensions `1..=n` in turn and also warm starts each
/// dimension from the previous best padded with zeros, so the value never
/// decreases in `n`. A given `warm` embedding is ascended as well.
pub fn sdp_rank_n_heuristic_warm(
    a: &WeightedInstance,
    n: usize,
    restarts: usize,
    sweeps: usize,
    seed: u64,
    warm: Option<&Embedding>,
) -> Result<HeuristicResult, InstanceError> {
    if n < 1 {
        return Err(InstanceError::BadParameter("rank must be at least 1".into()));
    }
    let nv = a.n();
    if let Some(w) = warm {
        if w.len() != nv {
            return Err(InstanceError::BadParameter(format!("warm start has {} vectors for {nv} vertices", w.len())));
        }
    }
    let mut best: Option<HeuristicResult> = None;
    for dim in 1..=n {
        let mut runs: Vec<HeuristicResult> = (0..restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = sampling::substream(seed, "heuristic", (dim as u64) << 32 | r as u64);
                let e = Embedding {
                    dim,
                    vectors: (0..nv).map(|_| random_unit(&mut rng, dim)).collect(),
                };
                ascend(a, e, sweeps)
            })
            .collect();
        if let Some(b) = &best {
            runs.push(ascend(a, b.embedding.padded(dim), sweeps));
        }
        if let Some(w) = warm.filter(|w| w.dim <= dim) {
            runs.push(ascend(a, w.padded(dim), sweeps));
        }
        let top = runs.into_iter().reduce(better).expect("at least one run");
        best = Some(match best {
            Some(b) if b.value > top.value => HeuristicResult {
                embedding: b.embedding.padded(dim),
                ..b
            },
            _ => top,
        });
    }
    Ok(best.expect("n ≥ 1"))
}

pub fn sdp_rank_n_heuristic(
    a: &WeightedInstance,
    n: usize,
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<HeuristicResult, InstanceError> {
    sdp_rank_n_heuristic_warm(a, n, restarts, sweeps, seed, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundingMode {
    Expectation,
    Sampled { count: usize, seed: u64 },
}

/// Random-hyperplane rounding: the expected value
/// `Σ A(1 − (2/π) arcsin f(x)·f(y))`, or the best of `count` sampled cuts.
pub fn hyperplane_rounding(e: &Embedding, a: &WeightedInstance, mode: RoundingMode) -> Result<f64, InstanceError> {
    let n = a.n();
    if e.len() != n {
        return Err(InstanceError::BadParameter(format!("embedding has {} vectors for {n} vertices", e.len())));
    }
    match mode {
        RoundingMode::Expectation => {
            let mut v = 0.0;
            for x in 0..n {
                for y in 0..n {
                    let w = a.weight(x, y);
                    if w != 0.0 {
                        let t = dot(&e.vectors[x], &e.vectors[y]).clamp(-1.0, 1.0);
                        v += w * (1.0 - std::f64::consts::FRAC_2_PI * t.asin());
                    }
                }
            }
            Ok(v)
        }
        RoundingMode::Sampled { count, seed } => Ok((0..count.max(1))
            .into_par_iter()
            .map(|i| {
                let mut rng = sampling::substream(seed, "rounding", i as u64);
                let r = gaussian_vector(&mut rng, e.dim);
                let signs: Vec<i8> = e.vectors.iter().map(|v| if dot(v, &r) >= 0.0 { 1 } else { -1 }).collect();
                cut_value(a, &signs)
            })
            .reduce(|| 0.0, f64::max)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AzMode {
    ExactArcs,
    MonteCarlo,
}

#[derive(Clone, Debug)]
pub struct AzEstimate {
    pub instance: WeightedInstance,
    /// Mass on the diagonal, dropped from the instance.
    pub removed_diagonal: f64,
    /// `Σ_{X,Y} A_z(X,Y)` including the diagonal.
    pub total_mass: f64,
    /// Sum over entries of the standard errors; zero in exact mode.
    pub std_error_l1: f64,
    pub mode: AzMode,
}

fn finish_az(n: usize, mut a: Vec<f64>, std_error_l1: f64, mode: AzMode) -> Result<AzEstimate, InstanceError> {
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let total_mass = a.iter().sum();
    let mut removed = 0.0;
    for i in 0..n {
        removed += a[i * n + i];
        a[i * n + i] = 0.0;
    }
    Ok(AzEstimate {
        instance: WeightedInstance::from_dense(n, a)?,
        removed_diagonal: removed,
        total_mass,
        std_error_l1,
        mode,
    })
}

/// `A_z` for the partition and weighted inner products `(t, z)`. On the
/// circle the arc overlaps are integrated exactly, counting rotations and
/// reflections equally; otherwise pairs `(x, y)` with `x` uniform and `y`
/// uniform on `{y : x·y = t}` are sampled, with samples spread over the
/// grid in proportion to `z`.
pub fn estimate_az(p: &SpherePartition, weights: &[(f64, f64)], samples: usize, seed: u64) -> Result<AzEstimate, InstanceError> {
    if let Some(&(t, z)) = weights.iter().find(|(t, z)| !(*z >= 0.0) || !(-1.0..=1.0).contains(t)) {
        return Err(InstanceError::BadParameter(format!("bad weight {z} at t={t}")));
    }
    let m = p.len();
    if let Some(arcs) = p.cell_arcs() {
        let mut a = vec![0.0; m * m];
        for &(t, z) in weights {
            if z == 0.0 {
                continue;
            }
            let th = t.acos();
            let c = z / (2.0 * TAU);
            for x in 0..m {
                for y in 0..m {
                    let (ys, yl) = arcs[y];
                    a[x * m + y] += c * (arc_overlap(arcs[x], (ys - th, yl)) + arc_overlap(arcs[x], (ys + th, yl)));
                }
            }
        }
        return finish_az(m, a, 0.0, AzMode::ExactArcs);
    }
    if samples < MIN_AZ_SAMPLES {
        return Err(InstanceError::TooFewSamples {
            min: MIN_AZ_SAMPLES,
            got: samples,
        });
    }
    let zsum: f64 = weights.iter().map(|w| w.1).sum();
    let n = p.dimension();
    let mut a = vec![0.0; m * m];
    let mut var = vec![0.0; m * m];
    for (gi, &(t, z)) in weights.iter().enumerate() {
        if z == 0.0 {
            continue;
        }
        let count = ((samples as f64) * z / zsum).round().max(1.0) as usize;
        let chunks = count.div_ceil(AZ_CHUNK);
        let hits: Vec<usize> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = sampling::substream(seed, "az", (gi as u64) << 32 | c as u64);
                let len = AZ_CHUNK.min(count - c * AZ_CHUNK);
                let mut h = vec![0usize; m * m];
                let s = (1.0 - t * t).max(0.0).sqrt();
                for _ in 0..len {
                    let x = random_unit(&mut rng, n);
                    let mut u = gaussian_vector(&mut rng, n);
                    let pr = dot(&u, &x);
                    u.iter_mut().zip(&x).for_each(|(a, b)| *a -= pr * b);
                    let u = normalized(u);
                    let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| t * a + s * b).collect();
                    h[p.locate(&x) * m + p.locate(&y)] += 1;
                }
                h
            })
            .reduce(
                || vec![0usize; m * m],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let nn = count as f64;
        for (k, &h) in hits.iter().enumerate() {
            let q = h as f64 / nn;
            a[k] += z * q;
            var[k] += z * z * q * (1.0 - q) / nn;
        }
    }
    let se_l1 = var.iter().map(|v| v.sqrt()).sum();
    finish_az(m, a, se_l1, AzMode::MonteCarlo)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sdp1Mode {
    Exact,
    /// Best sampled rounding, a lower bound only.
    Heuristic,
}

impl Sdp1Mode {
    pub fn label(self) -> &'static str {
        match self {
            Sdp1Mode::Exact => "exact",
            Sdp1Mode::Heuristic => "heuristic-lower-bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceOptions {
    pub samples: usize,
    pub restarts: usize,
    pub sweeps: usize,
    pub rounding_samples: usize,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions {
            samples: 200_000,
            restarts: 16,
            sweeps: 500,
            rounding_samples: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InstanceReport {
    pub m: usize,
    pub az: AzEstimate,
    pub sdp1: f64,
    pub sdp1_mode: Sdp1Mode,
    pub cut: Option<Vec<i8>>,
    pub sdpn: f64,
    pub embedding: Embedding,
    pub ratio: f64,
    pub noise: f64,
    pub diameter: f64,
}

impl InstanceReport {
    /// True when the ratio is backed by an exact max-cut value.
    pub fn is_demonstrated_gap(&self) -> bool {
        self.sdp1_mode == Sdp1Mode::Exact
    }
}

fn certificate_weights(cert: &DualCertificate) -> Result<Vec<(f64, f64)>, InstanceError> {
    let w: Vec<(f64, f64)> = cert.grid.iter().filter(|g| g.z > 0.0).map(|g| (g.t, g.z)).collect();
    if w.is_empty() {
        return Err(InstanceError::NoWeight);
    }
    Ok(w)
}

struct Warm<'a> {
    embedding: &'a Embedding,
    cut: Option<&'a [i8]>,
    parents: &'a [usize],
}

fn report_for(
    p: &SpherePartition,
    weights: &[(f64, f64)],
    n: usize,
    opts: &InstanceOptions,
    seed: u64,
    warm: Option<Warm<'_>>,
) -> Result<InstanceReport, InstanceError> {
    let az = estimate_az(p, weights, opts.samples, seed)?;
    let a = &az.instance;
    let lifted = warm.as_ref().map(|w| w.embedding.lifted(w.parents));
    let h = sdp_rank_n_heuristic_warm(a, n, opts.restarts, opts.sweeps, seed, lifted.as_ref())?;
    let (sdp1, mode, cut) = if a.n() <= MAX_EXACT_VERTICES {
        let (v, f) = max_cut_exact(a)?;
        (v, Sdp1Mode::Exact, Some(f))
    } else {
        let mut v = hyperplane_rounding(
            &h.embedding,
            a,
            RoundingMode::Sampled {
                count: opts.rounding_samples,
                seed,
            },
        )?;
        if let Some(c) = warm.as_ref().and_then(|w| w.cut.map(|c| (c, w.parents))) {
            let lifted: Vec<i8> = c.1.iter().map(|&q| c.0[q]).collect();
            v = v.max(cut_value(a, &lifted));
        }
        (v, Sdp1Mode::Heuristic, None)
    };
    let ratio = if h.value > 0.0 { sdp1 / h.value } else { 1.0 };
    let noise = if h.value > 0.0 { 2.0 * az.std_error_l1 * (1.0 + ratio) / h.value } else { 0.0 };
    Ok(InstanceReport {
        m: p.len(),
        sdp1,
        sdp1_mode: mode,
        cut,
        sdpn: h.value,
        embedding: h.embedding,
        ratio,
        noise,
        diameter: p.diameter(),
        az,
    })
}

/// Instance on `m_cells` cells built from the certificate's grid weights,
/// with `sdp₁` and the rank-`n` heuristic value.
pub fn instance_from_certificate(
    cert: &DualCertificate,
    m_cells: usize,
    opts: &InstanceOptions,
    seed: u64,
) -> Result<InstanceReport, InstanceError> {
    let weights = certificate_weights(cert)?;
    let p = build_partition(cert.n, m_cells, seed)?;
    report_for(&p, &weights, cert.n, opts, seed, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub m: usize,
    pub sdp1: f64,
    pub sdp1_mode: Sdp1Mode,
    pub sdpn: f64,
    pub ratio: f64,
    pub noise: f64,
}

/// Ratios on nested partitions. Each refinement warm starts from the lifted
/// embedding and cut of the previous one, so both value columns are
/// nondecreasing.
pub fn ratio_trend(
    cert: &DualCertificate,
    m_list: &[usize],
    opts: &InstanceOptions,
    seed: u64,
) -> Result<Vec<TrendRow>, InstanceError> {
    if m_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(InstanceError::BadParameter("cell counts must be ascending".into()));
    }
    let weights = certificate_weights(cert)?;
    let parts = nested_partitions(cert.n, m_list, seed)?;
    let mut rows = Vec::new();
    let mut prev: Option<InstanceReport> = None;
    for (i, p) in parts.iter().enumerate() {
        let warm = match (&prev, p.parents()) {
            (Some(r), Some(parents)) => Some(Warm {
                embedding: &r.embedding,
                cut: r.cut.as_deref(),
                parents,
            }),
            _ => None,
        };
        let rep = report_for(p, &weights, cert.n, opts, sampling_seed(seed, i), warm)?;
        rows.push(TrendRow {
            m: rep.m,
            sdp1: rep.sdp1,
            sdp1_mode: rep.sdp1_mode,
            sdpn: rep.sdpn,
            ratio: rep.ratio,
            noise: rep.noise,
        });
        prev = Some(rep);
    }
    Ok(rows)
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut s = String::from("m,sdp1,sdp1_mode,sdpn,ratio,noise\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.m, r.sdp1, r.sdp1_mode.label(), r.sdpn, r.ratio, r.noise);
    }
    s
}
