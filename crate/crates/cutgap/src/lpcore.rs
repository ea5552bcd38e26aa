//! Small dense linear-programming solver with dual values.
//!
//! Models are stated with general bounds and row senses, converted to the
//! standard form `min cᵀx, Ax = b, x ≥ 0`, and solved by a two-phase tableau
//! simplex (Dantzig pricing, Harris ratio test, Bland's rule while stalled).
//! When a model has many more rows than structural columns the solver works
//! on the dual standard form instead, which keeps the tableau small.
//!
//! Dual values are shadow prices `∂(objective)/∂(rhs)` of the original rows,
//! for either optimization sense. The final basis is refactored with an LU
//! decomposition so reported primal and dual values are consistent to
//! roundoff of a single solve rather than of the whole pivot sequence.

use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub name: String,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
    pub name: String,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePath {
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub path: SolvePath,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            path: SolvePath::Auto,
            max_iterations: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Shadow price of each row.
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Largest `|x_j - bound| · |d_j|` or `|slack_i · y_i|`.
    pub complementarity: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            vars: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, objective: f64, name: impl Into<String>) -> usize {
        self.vars.push(Variable {
            lower,
            upper,
            objective,
            name: name.into(),
        });
        self.vars.len() - 1
    }

    /// Adds a variable together with its entries in existing rows.
    pub fn add_column(
        &mut self,
        lower: f64,
        upper: f64,
        objective: f64,
        name: impl Into<String>,
        entries: &[(usize, f64)],
    ) -> usize {
        let j = self.add_var(lower, upper, objective, name);
        for &(i, v) in entries {
            self.rows[i].coeffs.push((j, v));
        }
        j
    }

    pub fn add_row(
        &mut self,
        coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
        name: impl Into<String>,
    ) -> usize {
        self.rows.push(Row {
            coeffs,
            sense,
            rhs,
            name: name.into(),
        });
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (j, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || !v.objective.is_finite() {
                return Err(LpError::InvalidModel(format!("variable {j} has non-finite data")));
            }
            if v.lower > v.upper || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!("variable {j} has empty bounds")));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!("row {i} has non-finite rhs")));
            }
            for &(j, v) in &r.coeffs {
                if j >= self.vars.len() || !v.is_finite() {
                    return Err(LpError::InvalidModel(format!("row {i} has a bad entry")));
                }
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, x)| v.objective * x).sum()
    }

    /// Reduced costs `c_j − Σ_i y_i A_ij`.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = self.vars.iter().map(|v| v.objective).collect();
        for (r, yi) in self.rows.iter().zip(y) {
            for &(j, v) in &r.coeffs {
                d[j] -= yi * v;
            }
        }
        d
    }
}

// ---------------------------------------------------------------------------
// Standard form

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = l + col
    Shift(f64, usize),
    /// x = u − col
    Flip(f64, usize),
    /// x = col⁺ − col⁻
    Split(usize, usize),
}

struct StdForm {
    m: usize,
    n: usize,
    /// Row-major `m × n`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Column index of the slack of each row, with its sign.
    slack: Vec<Option<(usize, f64)>>,
    /// Structural columns (everything but row slacks).
    structural: Vec<usize>,
    map: Vec<VarMap>,
    obj_sign: f64,
}

impl StdForm {
    fn from_lp(lp: &LinearProgram) -> StdForm {
        let obj_sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cols_c = Vec::new();
        let mut map = Vec::with_capacity(lp.vars.len());
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for v in &lp.vars {
            let c = obj_sign * v.objective;
            if v.lower.is_finite() {
                let col = cols_c.len();
                cols_c.push(c);
                map.push(VarMap::Shift(v.lower, col));
                if v.upper.is_finite() {
                    bound_rows.push((col, v.upper - v.lower));
                }
            } else if v.upper.is_finite() {
                let col = cols_c.len();
                cols_c.push(-c);
                map.push(VarMap::Flip(v.upper, col));
            } else {
                let col = cols_c.len();
                cols_c.push(c);
                cols_c.push(-c);
                map.push(VarMap::Split(col, col + 1));
            }
        }
        let n_struct = cols_c.len();
        let orig_rows = lp.rows.len();
        let m = orig_rows + bound_rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.sense != RowSense::Eq).count() + bound_rows.len();
        let n = n_struct + n_slack;
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut slack = vec![None; m];
        let mut next_slack = n_struct;
        for (i, r) in lp.rows.iter().enumerate() {
            let mut rhs = r.rhs;
            for &(j, v) in &r.coeffs {
                match map[j] {
                    VarMap::Shift(l, col) => {
                        a[i * n + col] += v;
                        rhs -= v * l;
                    }
                    VarMap::Flip(u, col) => {
                        a[i * n + col] -= v;
                        rhs -= v * u;
                    }
                    VarMap::Split(p, q) => {
                        a[i * n + p] += v;
                        a[i * n + q] -= v;
                    }
                }
            }
            b[i] = rhs;
            let s = match r.sense {
                RowSense::Le => Some(1.0),
                RowSense::Ge => Some(-1.0),
                RowSense::Eq => None,
            };
            if let Some(sign) = s {
                a[i * n + next_slack] = sign;
                slack[i] = Some((next_slack, sign));
                next_slack += 1;
            }
        }
        for (k, &(col, width)) in bound_rows.iter().enumerate() {
            let i = orig_rows + k;
            a[i * n + col] = 1.0;
            a[i * n + next_slack] = 1.0;
            slack[i] = Some((next_slack, 1.0));
            next_slack += 1;
            b[i] = width;
        }
        let mut c = cols_c;
        c.resize(n, 0.0);
        StdForm {
            m,
            n,
            a,
            b,
            c,
            slack,
            structural: (0..n_struct).collect(),
            map,
            obj_sign,
        }
    }

    fn to_original(&self, x_std: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Shift(l, col) => l + x_std[col],
                VarMap::Flip(u, col) => u - x_std[col],
                VarMap::Split(p, q) => x_std[p] - x_std[q],
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Tableau simplex on `min cᵀx, Ax = b, x ≥ 0`

#[derive(Debug)]
enum CoreStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

struct CoreResult {
    status: CoreStatus,
    x: Vec<f64>,
    /// Shadow prices `c_Bᵀ B⁻¹`.
    y: Vec<f64>,
    iterations: usize,
}

struct Tableau {
    m: usize,
    /// Columns: original `n`, then artificials, then rhs.
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs for the current phase, length `width - 1`, and the
    /// negated objective in the last slot.
    d: Vec<f64>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.data[r * w + q];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            let inv = 1.0 / p;
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..w).filter(|&j| self.data[r * w + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.data[r * w + j]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                row[j] -= f * v;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (&j, &v) in nz.iter().zip(&pivot_row) {
                self.d[j] -= f * v;
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d = cost.to_vec();
        self.d.push(0.0);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.d[j] -= cb * self.data[i * w + j];
                }
            }
        }
    }

    /// Runs simplex iterations on the current cost row.
    fn iterate(&mut self, allowed: &[bool], tol: f64, budget: &mut usize) -> CoreStatus {
        let w = self.width;
        let mut bland = false;
        let mut best_obj = f64::INFINITY;
        let mut stall = 0usize;
        loop {
            if *budget == 0 {
                return CoreStatus::IterationLimit;
            }
            let mut q = usize::MAX;
            let mut best = -tol;
            for j in 0..w - 1 {
                if !allowed[j] {
                    continue;
                }
                let dj = self.d[j];
                if dj < best {
                    q = j;
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            if q == usize::MAX {
                return CoreStatus::Optimal;
            }
            let piv_tol = 1e-9;
            let feas = tol;
            let mut r = usize::MAX;
            if bland {
                let mut best_ratio = f64::INFINITY;
                for i in 0..self.m {
                    let a = self.at(i, q);
                    if a > piv_tol {
                        let ratio = self.rhs(i).max(0.0) / a;
                        if ratio < best_ratio - 1e-15
                            || (ratio <= best_ratio + 1e-15 && r != usize::MAX && self.basis[i] < self.basis[r])
                        {
                            best_ratio = ratio;
                            r = i;
                        }
                    }
                }
            } else {
                let mut theta = f64::INFINITY;
                for i in 0..self.m {
                    let a = self.at(i, q);
                    if a > piv_tol {
                        theta = theta.min((self.rhs(i).max(0.0) + feas) / a);
                    }
                }
                let mut best_a = 0.0;
                for i in 0..self.m {
                    let a = self.at(i, q);
                    if a > piv_tol && self.rhs(i).max(0.0) / a <= theta && a > best_a {
                        best_a = a;
                        r = i;
                    }
                }
            }
            if r == usize::MAX {
                return CoreStatus::Unbounded;
            }
            self.pivot(r, q);
            for i in 0..self.m {
                let v = &mut self.data[i * w + w - 1];
                if *v < 0.0 && *v > -feas {
                    *v = 0.0;
                }
            }
            *budget -= 1;
            let obj = -self.d[w - 1];
            if obj < best_obj - 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > 50 {
                    bland = true;
                }
            }
        }
    }
}

fn core_solve(sf: &StdForm, tol: f64, max_iter: usize) -> CoreResult {
    let (m, n) = (sf.m, sf.n);
    // flip rows so that b ≥ 0
    let mut a = sf.a.clone();
    let mut b = sf.b.clone();
    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        if b[i] < 0.0 {
            row_sign[i] = -1.0;
            b[i] = -b[i];
            for v in &mut a[i * n..(i + 1) * n] {
                *v = -*v;
            }
        }
    }
    // unit columns usable as a starting basis
    let mut start: Vec<Option<usize>> = vec![None; m];
    let mut nnz = vec![0usize; n];
    let mut last_row = vec![0usize; n];
    for i in 0..m {
        for j in 0..n {
            if a[i * n + j] != 0.0 {
                nnz[j] += 1;
                last_row[j] = i;
            }
        }
    }
    for j in 0..n {
        if nnz[j] == 1 {
            let i = last_row[j];
            if start[i].is_none() && a[i * n + j] > 0.0 {
                start[i] = Some(j);
            }
        }
    }
    let art_rows: Vec<usize> = (0..m).filter(|&i| start[i].is_none()).collect();
    let n_art = art_rows.len();
    let width = n + n_art + 1;
    let mut data = vec![0.0; m * width];
    for i in 0..m {
        data[i * width..i * width + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        data[i * width + width - 1] = b[i];
    }
    let mut basis = vec![0usize; m];
    for (k, &i) in art_rows.iter().enumerate() {
        data[i * width + n + k] = 1.0;
        basis[i] = n + k;
    }
    for i in 0..m {
        if let Some(j) = start[i] {
            let p = data[i * width + j];
            if p != 1.0 {
                for v in &mut data[i * width..(i + 1) * width] {
                    *v /= p;
                }
            }
            basis[i] = j;
        }
    }
    let mut tab = Tableau {
        m,
        width,
        data,
        basis,
        d: Vec::new(),
    };
    let mut budget = max_iter;
    let mut allowed = vec![true; width - 1];

    if n_art > 0 {
        let mut cost = vec![0.0; width - 1];
        for c in cost.iter_mut().skip(n) {
            *c = 1.0;
        }
        tab.set_costs(&cost);
        match tab.iterate(&allowed, tol, &mut budget) {
            CoreStatus::Optimal => {}
            CoreStatus::IterationLimit => return failed(CoreStatus::IterationLimit, sf, max_iter),
            // cannot happen: the phase-one objective is bounded below
            _ => return failed(CoreStatus::IterationLimit, sf, max_iter),
        }
        let infeas = -tab.d[width - 1];
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeas > tol * scale * 10.0 {
            return failed(CoreStatus::Infeasible, sf, max_iter - budget);
        }
        // drive artificials out of the basis where possible
        for i in 0..m {
            if tab.basis[i] >= n {
                let mut best = 1e-7;
                let mut q = usize::MAX;
                for j in 0..n {
                    let v = tab.at(i, j).abs();
                    if v > best {
                        best = v;
                        q = j;
                    }
                }
                if q != usize::MAX {
                    tab.pivot(i, q);
                }
            }
        }
        for a in allowed.iter_mut().skip(n) {
            *a = false;
        }
    }
    let mut cost = sf.c.clone();
    cost.resize(width - 1, 0.0);
    tab.set_costs(&cost);
    let mut status = tab.iterate(&allowed, tol, &mut budget);

    // refactor the final basis and, if the refined point is off, reinvert and resume
    let mut refined = false;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; m];
    for _attempt in 0..3 {
        if !matches!(status, CoreStatus::Optimal) {
            break;
        }
        match refine(&tab, &a, &b, &cost, n) {
            Some((xr, yr, ok)) => {
                x = xr;
                y = yr;
                refined = true;
                if ok {
                    break;
                }
                if !reinvert(&mut tab, &a, &b, n) {
                    refined = false;
                    break;
                }
                tab.set_costs(&cost);
                status = tab.iterate(&allowed, tol, &mut budget);
                refined = false;
            }
            None => {
                refined = false;
                break;
            }
        }
    }
    if !refined && matches!(status, CoreStatus::Optimal) {
        // fall back to the tableau values
        x = vec![0.0; n];
        for i in 0..m {
            if tab.basis[i] < n {
                x[tab.basis[i]] = tab.rhs(i).max(0.0);
            }
        }
        for i in 0..m {
            // y_i = c_col − d_col for the unit column that started in row i
            let col = start[i].unwrap_or_else(|| n + art_rows.iter().position(|&r| r == i).unwrap());
            let unit = if col < n { a[i * n + col] } else { 1.0 };
            let c_col = if col < n { cost[col] } else { 0.0 };
            y[i] = (c_col - tab.d[col]) / unit;
        }
    }
    // undo the row flips on the shadow prices
    for i in 0..m {
        y[i] *= row_sign[i];
    }
    CoreResult {
        status,
        x,
        y,
        iterations: max_iter - budget,
    }
}

fn failed(status: CoreStatus, sf: &StdForm, iterations: usize) -> CoreResult {
    CoreResult {
        status,
        x: vec![0.0; sf.n],
        y: vec![0.0; sf.m],
        iterations,
    }
}

/// Solves `B x_B = b` and `Bᵀ y = c_B` for the current basis.
/// Returns `(x, y, consistent)`.
fn refine(tab: &Tableau, a: &[f64], b: &[f64], cost: &[f64], n: usize) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    let m = tab.m;
    if tab.basis.iter().any(|&j| j >= n) {
        // artificial left in a redundant row: solve on the remaining rows
        return refine_with_artificials(tab, a, b, cost, n);
    }
    let mut bm = DMatrix::<f64>::zeros(m, m);
    for (k, &j) in tab.basis.iter().enumerate() {
        for i in 0..m {
            bm[(i, k)] = a[i * n + j];
        }
    }
    let lu = bm.clone().lu();
    let xb = lu.solve(&DVector::from_column_slice(b))?;
    let cb = DVector::from_iterator(m, tab.basis.iter().map(|&j| cost[j]));
    let y = bm.transpose().lu().solve(&cb)?;
    let mut x = vec![0.0; n];
    let mut ok = true;
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for (k, &j) in tab.basis.iter().enumerate() {
        let v = xb[k];
        if !v.is_finite() || v < -1e-9 * scale {
            ok = false;
        }
        x[j] = v.max(0.0);
    }
    let cscale = 1.0 + cost.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for j in 0..n {
        let mut d = cost[j];
        for i in 0..m {
            d -= y[i] * a[i * n + j];
        }
        if !d.is_finite() || d < -1e-9 * cscale {
            ok = false;
        }
    }
    Some((x, y.iter().copied().collect(), ok))
}

fn refine_with_artificials(
    tab: &Tableau,
    a: &[f64],
    b: &[f64],
    cost: &[f64],
    n: usize,
) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    // rows whose basic variable is artificial are redundant; drop them
    let m = tab.m;
    let keep_cols: Vec<usize> = tab.basis.iter().copied().filter(|&j| j < n).collect();
    let mr = keep_cols.len();
    // choose mr independent rows by QR-free greedy elimination on the basis columns
    let full = DMatrix::<f64>::from_fn(m, mr, |i, k| a[i * n + keep_cols[k]]);
    let mut rows: Vec<usize> = Vec::new();
    let mut work = full.clone();
    let mut used = vec![false; m];
    for k in 0..mr {
        let mut best = 1e-10;
        let mut pr = usize::MAX;
        for i in 0..m {
            if !used[i] && work[(i, k)].abs() > best {
                best = work[(i, k)].abs();
                pr = i;
            }
        }
        if pr == usize::MAX {
            return None;
        }
        used[pr] = true;
        rows.push(pr);
        for i in 0..m {
            if i != pr {
                let f = work[(i, k)] / work[(pr, k)];
                if f != 0.0 {
                    for c in k..mr {
                        let v = work[(pr, c)];
                        work[(i, c)] -= f * v;
                    }
                }
            }
        }
    }
    let bm = DMatrix::<f64>::from_fn(mr, mr, |r, k| full[(rows[r], k)]);
    let br = DVector::from_iterator(mr, rows.iter().map(|&i| b[i]));
    let xb = bm.clone().lu().solve(&br)?;
    let cb = DVector::from_iterator(mr, keep_cols.iter().map(|&j| cost[j]));
    let yr = bm.transpose().lu().solve(&cb)?;
    let mut y = vec![0.0; m];
    for (r, &i) in rows.iter().enumerate() {
        y[i] = yr[r];
    }
    let mut x = vec![0.0; n];
    let mut ok = true;
    for (k, &j) in keep_cols.iter().enumerate() {
        if xb[k] < -1e-9 {
            ok = false;
        }
        x[j] = xb[k].max(0.0);
    }
    // dropped rows must still be satisfied
    for i in 0..m {
        let act: f64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
        if (act - b[i]).abs() > 1e-7 * (1.0 + b[i].abs()) {
            ok = false;
        }
    }
    for j in 0..n {
        let mut d = cost[j];
        for i in 0..m {
            d -= y[i] * a[i * n + j];
        }
        if d < -1e-9 {
            ok = false;
        }
    }
    Some((x, y, ok))
}

/// Recomputes the tableau as `B⁻¹[A | b]` for the current basis.
fn reinvert(tab: &mut Tableau, a: &[f64], b: &[f64], n: usize) -> bool {
    let m = tab.m;
    if tab.basis.iter().any(|&j| j >= n) {
        return false;
    }
    let bm = DMatrix::<f64>::from_fn(m, m, |i, k| a[i * n + tab.basis[k]]);
    let lu = bm.lu();
    let w = tab.width;
    let mut rhs = DMatrix::<f64>::zeros(m, n + 1);
    for i in 0..m {
        for j in 0..n {
            rhs[(i, j)] = a[i * n + j];
        }
        rhs[(i, n)] = b[i];
    }
    let Some(sol) = lu.solve(&rhs) else {
        return false;
    };
    for i in 0..m {
        for j in 0..n {
            tab.data[i * w + j] = sol[(i, j)];
        }
        for j in n..w - 1 {
            tab.data[i * w + j] = 0.0;
        }
        tab.data[i * w + w - 1] = sol[(i, n)].max(0.0);
    }
    true
}

// ---------------------------------------------------------------------------
// Dual standard form

/// Builds `min −bᵀy(w)  s.t.  A_Sᵀ y(w) + u = c_S,  w, u ≥ 0` where `y(w)`
/// absorbs the sign restrictions implied by the row slacks.
fn dual_std(sf: &StdForm) -> (StdForm, Vec<Vec<(usize, f64)>>) {
    let m = sf.m;
    let ns = sf.structural.len();
    // y_i = Σ coef · w_col
    let mut ymap: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut nw = 0;
    for i in 0..m {
        match sf.slack[i] {
            Some((_, s)) if s > 0.0 => {
                ymap.push(vec![(nw, -1.0)]);
                nw += 1;
            }
            Some(_) => {
                ymap.push(vec![(nw, 1.0)]);
                nw += 1;
            }
            None => {
                ymap.push(vec![(nw, 1.0), (nw + 1, -1.0)]);
                nw += 2;
            }
        }
    }
    let n = nw + ns;
    let mut a = vec![0.0; ns * n];
    let mut c = vec![0.0; n];
    for i in 0..m {
        for &(col, coef) in &ymap[i] {
            c[col] -= sf.b[i] * coef;
        }
    }
    for (r, &j) in sf.structural.iter().enumerate() {
        for i in 0..m {
            let v = sf.a[i * sf.n + j];
            if v != 0.0 {
                for &(col, coef) in &ymap[i] {
                    a[r * n + col] += v * coef;
                }
            }
        }
        a[r * n + nw + r] = 1.0;
    }
    let b: Vec<f64> = sf.structural.iter().map(|&j| sf.c[j]).collect();
    let slack = (0..ns).map(|r| Some((nw + r, 1.0))).collect();
    (
        StdForm {
            m: ns,
            n,
            a,
            b,
            c,
            slack,
            structural: (0..nw).collect(),
            map: Vec::new(),
            obj_sign: 1.0,
        },
        ymap,
    )
}

// ---------------------------------------------------------------------------

pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    if !(1e-12..=1e-4).contains(&opts.tol) {
        return Err(LpError::InvalidModel(format!("tolerance {} outside [1e-12, 1e-4]", opts.tol)));
    }
    let sf = StdForm::from_lp(lp);
    let use_dual = match opts.path {
        SolvePath::Primal => false,
        SolvePath::Dual => true,
        SolvePath::Auto => sf.m > 2 * sf.structural.len() + 10,
    };
    let (status, x_std, y_std, iterations) = if use_dual {
        let (ds, ymap) = dual_std(&sf);
        let res = core_solve(&ds, opts.tol, opts.max_iterations);
        match res.status {
            CoreStatus::Optimal => {
                let mut y = vec![0.0; sf.m];
                for i in 0..sf.m {
                    y[i] = ymap[i].iter().map(|&(col, coef)| coef * res.x[col]).sum();
                }
                let mut x = vec![0.0; sf.n];
                for (r, &j) in sf.structural.iter().enumerate() {
                    x[j] = (-res.y[r]).max(0.0);
                }
                for i in 0..sf.m {
                    if let Some((col, s)) = sf.slack[i] {
                        let act: f64 = sf.structural.iter().map(|&j| sf.a[i * sf.n + j] * x[j]).sum();
                        x[col] = (s * (sf.b[i] - act)).max(0.0);
                    }
                }
                (CoreStatus::Optimal, x, y, res.iterations)
            }
            CoreStatus::Unbounded => (CoreStatus::Infeasible, vec![], vec![], res.iterations),
            CoreStatus::Infeasible => {
                // primal is unbounded or infeasible; let the primal path decide
                let r = core_solve(&sf, opts.tol, opts.max_iterations);
                (r.status, r.x, r.y, res.iterations + r.iterations)
            }
            CoreStatus::IterationLimit => (CoreStatus::IterationLimit, vec![], vec![], res.iterations),
        }
    } else {
        let r = core_solve(&sf, opts.tol, opts.max_iterations);
        (r.status, r.x, r.y, r.iterations)
    };
    let nv = lp.vars.len();
    let nr = lp.rows.len();
    let mut sol = LpSolution {
        status: LpStatus::NumericalFailure,
        objective: f64::NAN,
        primal: vec![0.0; nv],
        dual: vec![0.0; nr],
        reduced_costs: vec![0.0; nv],
        primal_infeasibility: f64::INFINITY,
        dual_infeasibility: f64::INFINITY,
        complementarity: f64::INFINITY,
        iterations,
    };
    match status {
        CoreStatus::Optimal => {}
        CoreStatus::Infeasible => {
            sol.status = LpStatus::Infeasible;
            return Ok(sol);
        }
        CoreStatus::Unbounded => {
            sol.status = LpStatus::Unbounded;
            return Ok(sol);
        }
        CoreStatus::IterationLimit => return Ok(sol),
    }
    let x = sf.to_original(&x_std);
    let y: Vec<f64> = (0..nr).map(|i| sf.obj_sign * y_std[i]).collect();
    let check = weak_duality_check(lp, &x, &y);
    sol.objective = lp.objective_value(&x);
    sol.reduced_costs = lp.reduced_costs(&y);
    sol.primal = x;
    sol.dual = y;
    sol.primal_infeasibility = check.primal_infeasibility;
    sol.dual_infeasibility = check.dual_infeasibility;
    sol.complementarity = check.complementarity;
    let scale = opts.tol * (1.0 + sol.objective.abs());
    sol.status = if check.primal_infeasibility <= scale
        && check.dual_infeasibility <= scale
        && check.gap.abs() <= scale
    {
        LpStatus::Optimal
    } else {
        LpStatus::NumericalFailure
    };
    Ok(sol)
}

#[derive(Clone, Debug)]
pub struct DualityCheck {
    pub primal_objective: f64,
    /// Dual objective with sign-infeasible reduced costs on infinite bounds
    /// ignored; meaningful when `dual_infeasibility` is small.
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    /// `dual − primal` for maximization, `primal − dual` for minimization.
    pub gap: f64,
}

impl DualityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.primal_infeasibility <= tol && self.dual_infeasibility <= tol && self.gap >= -tol
    }
}

/// Checks a primal/dual pair against the model. Dual values follow the
/// shadow-price convention of [`LpSolution::dual`].
pub fn weak_duality_check(lp: &LinearProgram, x: &[f64], y: &[f64]) -> DualityCheck {
    let maximize = lp.sense == Sense::Maximize;
    let act = lp.row_activity(x);
    let mut pinf = 0.0f64;
    let mut dinf = 0.0f64;
    let mut comp = 0.0f64;
    for (j, v) in lp.vars.iter().enumerate() {
        pinf = pinf.max(v.lower - x[j]).max(x[j] - v.upper);
    }
    let mut dual_obj = 0.0;
    for (i, r) in lp.rows.iter().enumerate() {
        let slack = r.rhs - act[i];
        match r.sense {
            RowSense::Le => pinf = pinf.max(-slack),
            RowSense::Ge => pinf = pinf.max(slack),
            RowSense::Eq => pinf = pinf.max(slack.abs()),
        }
        // for max: ≤ rows carry y ≥ 0, ≥ rows y ≤ 0; reversed for min
        let yi = y[i];
        let wrong = match (r.sense, maximize) {
            (RowSense::Le, true) | (RowSense::Ge, false) => (-yi).max(0.0),
            (RowSense::Ge, true) | (RowSense::Le, false) => yi.max(0.0),
            (RowSense::Eq, _) => 0.0,
        };
        dinf = dinf.max(wrong);
        comp = comp.max((slack * yi).abs());
        dual_obj += r.rhs * yi;
    }
    let d = lp.reduced_costs(y);
    for (j, v) in lp.vars.iter().enumerate() {
        let dj = d[j];
        // for max, d_j > 0 needs a finite upper bound; for min a finite lower bound
        let (pos_bound, neg_bound) = if maximize { (v.upper, v.lower) } else { (v.lower, v.upper) };
        if dj > 0.0 {
            if pos_bound.is_finite() {
                dual_obj += pos_bound * dj;
                comp = comp.max((x[j] - pos_bound).abs() * dj);
            } else {
                dinf = dinf.max(dj);
            }
        } else if dj < 0.0 {
            if neg_bound.is_finite() {
                dual_obj += neg_bound * dj;
                comp = comp.max((x[j] - neg_bound).abs() * -dj);
            } else {
                dinf = dinf.max(-dj);
            }
        }
    }
    let primal_obj = lp.objective_value(x);
    let gap = if maximize {
        dual_obj - primal_obj
    } else {
        primal_obj - dual_obj
    };
    DualityCheck {
        primal_objective: primal_obj,
        dual_objective: dual_obj,
        primal_infeasibility: pinf.max(0.0),
        dual_infeasibility: dinf,
        complementarity: comp,
        gap,
    }
}

/// Serializes the model in CPLEX LP format, for debugging with external solvers.
pub fn write_lp_format(lp: &LinearProgram) -> String {
    fn name(s: &str, prefix: &str, i: usize) -> String {
        let clean: String = s
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "_.".contains(c) { c } else { '_' })
            .collect();
        if clean.is_empty() || clean.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            format!("{prefix}{i}{clean}")
        } else {
            clean
        }
    }
    fn term(out: &mut String, coef: f64, var: &str, first: bool) {
        if coef < 0.0 {
            let _ = write!(out, " - {} {}", -coef, var);
        } else if first {
            let _ = write!(out, " {coef} {var}");
        } else {
            let _ = write!(out, " + {coef} {var}");
        }
    }
    let names: Vec<String> = lp.vars.iter().enumerate().map(|(j, v)| name(&v.name, "x", j)).collect();
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n obj:",
        Sense::Minimize => "Minimize\n obj:",
    });
    let mut first = true;
    for (j, v) in lp.vars.iter().enumerate() {
        if v.objective != 0.0 {
            term(&mut out, v.objective, &names[j], first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, r) in lp.rows.iter().enumerate() {
        let _ = write!(out, " {}:", name(&r.name, "r", i));
        let mut first = true;
        for &(j, v) in &r.coeffs {
            term(&mut out, v, &names[j], first);
            first = false;
        }
        if first {
            let _ = write!(out, " 0 {}", names.first().map(String::as_str).unwrap_or("x0"));
        }
        let op = match r.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in lp.vars.iter().enumerate() {
        let lo = if v.lower.is_finite() { v.lower.to_string() } else { "-inf".into() };
        let hi = if v.upper.is_finite() { v.upper.to_string() } else { "+inf".into() };
        let _ = writeln!(out, " {lo} <= {} <= {hi}", names[j]);
    }
    out.push_str("End\n");
    out
}
