//! Revised simplex for `max cᵀx  s.t.  Ax = b, x ≥ 0` with sparse columns.
//!
//! The basis is held as a dense LU factorization refreshed every
//! `refactor_every` pivots, with product-form eta updates in between.
//! Feasibility comes from a phase with one artificial per row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-compressed sparse matrix.
#[derive(Clone, Debug, Default)]
pub struct SparseColumns {
    start: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseColumns {
    pub fn new() -> Self {
        SparseColumns { start: vec![0], rows: Vec::new(), vals: Vec::new() }
    }
    pub fn push(&mut self, entries: &[(usize, f64)]) {
        for &(r, v) in entries {
            if v != 0.0 {
                self.rows.push(r);
                self.vals.push(v);
            }
        }
        self.start.push(self.rows.len());
    }
    pub fn len(&self) -> usize {
        self.start.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.start[j], self.start[j + 1]);
        self.rows[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }
    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        self.col(j).map(|(r, v)| v * y[r]).sum()
    }
}

/// An LP in equality standard form.
#[derive(Clone, Debug)]
pub struct StandardLp {
    pub n_rows: usize,
    pub cols: SparseColumns,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    /// Smallest-index entering and leaving variables throughout.
    Bland,
    /// Most positive reduced cost; switches to Bland during long degenerate runs.
    Dantzig,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub pricing: Pricing,
    pub pivot_tol: f64,
    /// Reduced costs below this (relative to the cost scale) count as non-positive.
    pub optimality_tol: f64,
    /// Phase-one objective above `-feasibility_tol` counts as feasible.
    pub feasibility_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: usize,
    pub degenerate_streak: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pricing: Pricing::Dantzig,
            pivot_tol: 1e-10,
            optimality_tol: 1e-11,
            feasibility_tol: 1e-9,
            refactor_every: 64,
            max_iterations: 1_000_000,
            degenerate_streak: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    /// Row duals `y` with reduced costs `c − Aᵀy ≤ 0` at optimality.
    pub y: Vec<f64>,
    pub objective: f64,
    /// Basic variable per row; indices ≥ n refer to artificials.
    pub basis: Vec<usize>,
    pub iterations: usize,
    /// Basic variables at zero (primal degeneracy).
    pub degenerate_basics: usize,
}

/// Dense LU with partial pivoting, `P B = L U`.
struct Lu {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: usize, mut a: Vec<f64>) -> Option<Lu> {
        let mut perm: Vec<usize> = (0..m).collect();
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        for k in 0..m {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for r in k + 1..m {
                let v = a[r * m + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-13 * scale {
                return None;
            }
            if p != k {
                for c in 0..m {
                    a.swap(k * m + c, p * m + c);
                }
                perm.swap(k, p);
            }
            let piv = a[k * m + k];
            let (head, tail) = a.split_at_mut((k + 1) * m);
            let row_k = &head[k * m..];
            for r in 0..m - k - 1 {
                let row = &mut tail[r * m..(r + 1) * m];
                let f = row[k] / piv;
                if f != 0.0 {
                    row[k] = f;
                    for c in k + 1..m {
                        row[c] -= f * row_k[c];
                    }
                } else {
                    row[k] = 0.0;
                }
            }
        }
        Some(Lu { m, lu: a, perm })
    }

    /// Solve `B x = rhs` in place.
    fn solve(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..m {
            let row = &self.lu[i * m..i * m + i];
            let mut s = x[i];
            for (k, l) in row.iter().enumerate() {
                s -= l * x[k];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let row = &self.lu[i * m..(i + 1) * m];
            let mut s = x[i];
            for k in i + 1..m {
                s -= row[k] * x[k];
            }
            x[i] = s / row[i];
        }
        rhs.copy_from_slice(&x);
    }

    /// Solve `Bᵀ y = rhs` in place.
    fn solve_transpose(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut z = rhs.to_vec();
        // Uᵀ w = rhs
        for i in 0..m {
            let s = z[i] / self.lu[i * m + i];
            z[i] = s;
            if s != 0.0 {
                let row = &self.lu[i * m..(i + 1) * m];
                for k in i + 1..m {
                    z[k] -= row[k] * s;
                }
            }
        }
        // Lᵀ v = w
        for i in (0..m).rev() {
            let s = z[i];
            if s != 0.0 {
                let row = &self.lu[i * m..i * m + i];
                for (k, l) in row.iter().enumerate() {
                    z[k] -= l * s;
                }
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            rhs[p] = z[i];
        }
    }
}

struct Eta {
    row: usize,
    col: Vec<f64>,
}

struct Basis {
    lu: Lu,
    etas: Vec<Eta>,
}

impl Basis {
    fn ftran(&self, v: &mut [f64]) {
        self.lu.solve(v);
        for e in &self.etas {
            let xr = v[e.row] / e.col[e.row];
            v[e.row] = xr;
            if xr != 0.0 {
                for (i, a) in e.col.iter().enumerate() {
                    if i != e.row {
                        v[i] -= a * xr;
                    }
                }
            }
        }
    }

    fn btran(&self, v: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut s = v[e.row];
            for (i, a) in e.col.iter().enumerate() {
                if i != e.row {
                    s -= v[i] * a;
                }
            }
            v[e.row] = s / e.col[e.row];
        }
        self.lu.solve_transpose(v);
    }
}

struct Solver<'a> {
    lp: &'a StandardLp,
    n: usize,
    m: usize,
    opts: &'a SimplexOptions,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    xb: Vec<f64>,
    fact: Basis,
    iterations: usize,
}

impl<'a> Solver<'a> {
    fn column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for (r, v) in self.lp.cols.col(j) {
                out[r] = v;
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for r in 0..m {
                dense[r * m + k] = col[r];
            }
        }
        let lu = Lu::factor(m, dense).ok_or_else(|| Error::DegenerateBasis("basis matrix is singular".into()))?;
        self.fact = Basis { lu, etas: Vec::new() };
        let mut xb = self.lp.b.clone();
        self.fact.ftran(&mut xb);
        for v in xb.iter_mut() {
            if *v < 0.0 && *v > -1e-13 {
                *v = 0.0;
            }
        }
        self.xb = xb;
        Ok(())
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| cost(j)).collect();
        self.fact.btran(&mut y);
        y
    }

    /// Runs simplex iterations for the given cost; `allow(j)` filters entering candidates.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, allow: &dyn Fn(usize) -> bool, block_artificials: bool) -> Result<()> {
        let m = self.m;
        let total = self.n + m;
        let cscale = (0..total).map(|j| cost(j).abs()).fold(1.0f64, f64::max);
        let dtol = self.opts.optimality_tol * cscale;
        let mut streak = 0usize;
        let mut since_refactor = 0usize;
        let mut alpha = vec![0.0; m];
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::Internal(format!("simplex iteration limit {} reached", self.opts.max_iterations)));
            }
            let y = self.duals(cost);
            let bland = self.opts.pricing == Pricing::Bland || streak >= self.opts.degenerate_streak;
            let mut enter = None;
            let mut best = dtol;
            for j in 0..total {
                if self.in_basis[j] || !allow(j) {
                    continue;
                }
                let d = if j < self.n { cost(j) - self.lp.cols.dot(j, &y) } else { cost(j) - y[j - self.n] };
                if d > best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = enter else { return Ok(()) };

            self.column(q, &mut alpha);
            self.fact.ftran(&mut alpha);

            let tol = self.opts.pivot_tol;
            let mut leave: Option<usize> = None;
            let mut theta = f64::INFINITY;
            for r in 0..m {
                let a = alpha[r];
                let art = self.basis[r] >= self.n;
                let ratio = if a > tol {
                    self.xb[r].max(0.0) / a
                } else if block_artificials && art && a < -tol {
                    0.0
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if ratio < theta - 1e-12 * theta.max(1e-300) {
                            true
                        } else if ratio <= theta + 1e-12 * theta.max(1e-300) {
                            if bland {
                                self.basis[r] < self.basis[l]
                            } else {
                                let (cur_art, new_art) = (self.basis[l] >= self.n, art);
                                (new_art && !cur_art) || (new_art == cur_art && a.abs() > alpha[l].abs())
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(r);
                    theta = ratio;
                }
            }
            let Some(r) = leave else { return Err(Error::Unbounded) };

            for i in 0..m {
                if i != r {
                    self.xb[i] -= theta * alpha[i];
                }
            }
            self.xb[r] = theta;
            streak = if theta == 0.0 { streak + 1 } else { 0 };
            let out = self.basis[r];
            self.in_basis[out] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            self.iterations += 1;
            since_refactor += 1;
            if since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                since_refactor = 0;
            } else {
                self.fact.etas.push(Eta { row: r, col: alpha.clone() });
            }
        }
    }
}

/// Solves `max cᵀx, Ax = b, x ≥ 0`. Rows with negative `b` are negated internally.
pub fn solve(lp: &StandardLp, opts: &SimplexOptions) -> Result<SimplexSolution> {
    let m = lp.n_rows;
    let n = lp.cols.len();
    if lp.b.len() != m || lp.c.len() != n {
        return Err(Error::Internal("inconsistent LP dimensions".into()));
    }
    let flip: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut cols = SparseColumns::new();
    let mut buf = Vec::new();
    for j in 0..n {
        buf.clear();
        buf.extend(lp.cols.col(j).map(|(r, v)| (r, v * flip[r])));
        cols.push(&buf);
    }
    let std = StandardLp { n_rows: m, cols, b: lp.b.iter().zip(&flip).map(|(b, f)| b * f).collect(), c: lp.c.clone() };

    let mut in_basis = vec![false; n + m];
    for r in 0..m {
        in_basis[n + r] = true;
    }
    let identity = Lu { m, lu: (0..m * m).map(|k| if k / m == k % m { 1.0 } else { 0.0 }).collect(), perm: (0..m).collect() };
    let mut s = Solver {
        lp: &std,
        n,
        m,
        opts,
        basis: (n..n + m).collect(),
        in_basis,
        xb: std.b.clone(),
        fact: Basis { lu: identity, etas: Vec::new() },
        iterations: 0,
    };

    let phase1 = |j: usize| if j >= n { -1.0 } else { 0.0 };
    s.optimize(&phase1, &|_| true, false)?;
    s.refactor()?;
    let infeas: f64 = s.basis.iter().zip(&s.xb).filter(|(j, _)| **j >= n).map(|(_, v)| v.max(0.0)).sum();
    let bscale = std.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if infeas > opts.feasibility_tol * bscale {
        return Err(Error::Infeasible(format!("phase one ended with artificial mass {infeas:e}")));
    }

    let c = &std.c;
    let phase2 = |j: usize| if j < n { c[j] } else { 0.0 };
    s.optimize(&phase2, &|j| j < n, true)?;
    s.refactor()?;

    let mut x = vec![0.0; n];
    let mut degenerate = 0;
    for (r, &j) in s.basis.iter().enumerate() {
        let v = s.xb[r];
        if v.abs() <= 1e-14 {
            degenerate += 1;
        }
        if j < n {
            x[j] = v;
        }
    }
    let y_flipped = s.duals(&phase2);
    let y: Vec<f64> = y_flipped.iter().zip(&flip).map(|(v, f)| v * f).collect();
    let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Ok(SimplexSolution { x, y, objective, basis: s.basis, iterations: s.iterations, degenerate_basics: degenerate })
}
