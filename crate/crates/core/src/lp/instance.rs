use serde::{Deserialize, Serialize};

use super::simplex::{self, Pricing, SimplexOptions, SimplexSolution, SparseColumns, StandardLp};
use crate::error::{Error, Result};
use crate::model::{Outcome, Problem, TieBreak};

pub const DEFAULT_SIZE_CAP: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObedienceKind {
    Equality,
    /// Σ u π ≥ 0, via one surplus column per action row.
    Inequality,
}

/// Dimension summary of the outcome LP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpDims {
    pub variables: usize,
    pub rows: usize,
    pub marginal_rows: usize,
    pub obedience_rows: usize,
    pub dropped_cells: usize,
    pub rank_estimate: usize,
}

/// The outcome LP of a problem: one mass variable per admissible (action, state) cell.
#[derive(Clone, Debug)]
pub struct LpInstance {
    problem: Problem,
    cells: Vec<(usize, usize)>,
    cost: Vec<f64>,
    ucoef: Vec<f64>,
    obedience: ObedienceKind,
    dims: LpDims,
}

pub fn build_lp(problem: &Problem) -> Result<LpInstance> {
    build_lp_with_cap(problem, DEFAULT_SIZE_CAP)
}

pub fn build_lp_with_cap(problem: &Problem, cap: usize) -> Result<LpInstance> {
    let (m, n) = (problem.n_actions(), problem.n_states());
    let full = m * n;
    if full > cap {
        return Err(Error::SizeLimit { vars: full, cap });
    }
    let mut cells = Vec::with_capacity(full);
    let mut cost = Vec::with_capacity(full);
    let mut ucoef = Vec::with_capacity(full);
    for j in 0..m {
        let y = problem.action(j);
        for i in 0..n {
            let x = problem.state(i);
            if problem.is_forbidden(y, x) {
                continue;
            }
            cells.push((j, i));
            cost.push(problem.v(y, x));
            ucoef.push(problem.obedience_coef(j, i));
        }
    }
    let obedience = match problem.tie_break() {
        TieBreak::StrictFoc => ObedienceKind::Equality,
        TieBreak::SenderFavorable => ObedienceKind::Inequality,
    };
    let rank = rank_estimate(n, m, &cells, &ucoef, obedience);
    let dims = LpDims {
        variables: cells.len() + if obedience == ObedienceKind::Inequality { m } else { 0 },
        rows: n + m,
        marginal_rows: n,
        obedience_rows: m,
        dropped_cells: full - cells.len(),
        rank_estimate: rank,
    };
    Ok(LpInstance { problem: problem.clone(), cells, cost, ucoef, obedience, dims })
}

/// Numerical rank of the constraint matrix via elimination on A·Aᵀ.
fn rank_estimate(n: usize, m: usize, cells: &[(usize, usize)], u: &[f64], kind: ObedienceKind) -> usize {
    let r = n + m;
    let mut g = vec![0.0; r * r];
    for (k, &(j, i)) in cells.iter().enumerate() {
        let (a, b) = (i, n + j);
        g[a * r + a] += 1.0;
        g[b * r + b] += u[k] * u[k];
        g[a * r + b] += u[k];
        g[b * r + a] += u[k];
    }
    if kind == ObedienceKind::Inequality {
        for j in 0..m {
            g[(n + j) * r + n + j] += 1.0;
        }
    }
    let scale = (0..r).map(|k| g[k * r + k]).fold(0.0f64, f64::max);
    let tol = 1e-10 * scale.max(1e-300);
    let mut rank = 0;
    let mut used = vec![false; r];
    for c in 0..r {
        let mut p = None;
        let mut best = tol;
        for row in 0..r {
            if !used[row] && g[row * r + c].abs() > best {
                best = g[row * r + c].abs();
                p = Some(row);
            }
        }
        let Some(p) = p else { continue };
        used[p] = true;
        rank += 1;
        let piv = g[p * r + c];
        for row in 0..r {
            if row != p && !used[row] {
                let f = g[row * r + c] / piv;
                if f != 0.0 {
                    for k in c..r {
                        g[row * r + k] -= f * g[p * r + k];
                    }
                }
            }
        }
    }
    rank
}

/// Optimal outcome plus the final basis data needed to read off duals.
#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub outcome: Outcome,
    pub objective: f64,
    /// Raw row duals: marginal rows first, then obedience rows.
    pub row_duals: Vec<f64>,
    pub iterations: usize,
    pub degenerate_basics: usize,
    pub pricing: Pricing,
}

impl LpInstance {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }
    pub fn dims(&self) -> &LpDims {
        &self.dims
    }
    pub fn obedience(&self) -> ObedienceKind {
        self.obedience
    }
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }
    pub fn cost(&self) -> &[f64] {
        &self.cost
    }
    pub fn ucoef(&self) -> &[f64] {
        &self.ucoef
    }

    pub fn to_standard(&self) -> StandardLp {
        let n = self.problem.n_states();
        let m = self.problem.n_actions();
        let mut cols = SparseColumns::new();
        let mut c = self.cost.clone();
        for (k, &(j, i)) in self.cells.iter().enumerate() {
            cols.push(&[(i, 1.0), (n + j, self.ucoef[k])]);
        }
        if self.obedience == ObedienceKind::Inequality {
            for j in 0..m {
                cols.push(&[(n + j, -1.0)]);
                c.push(0.0);
            }
        }
        let mut b = self.problem.prior().to_vec();
        b.extend(std::iter::repeat_n(0.0, m));
        StandardLp { n_rows: n + m, cols, b, c }
    }
}

/// Solves the outcome LP with the default Dantzig/Bland policy.
pub fn solve_primal(lp: &LpInstance) -> Result<PrimalSolution> {
    solve_primal_with(lp, &SimplexOptions::default())
}

pub fn solve_primal_with(lp: &LpInstance, opts: &SimplexOptions) -> Result<PrimalSolution> {
    let std = lp.to_standard();
    let sol: SimplexSolution = simplex::solve(&std, opts).map_err(|e| match e {
        Error::Infeasible(msg) => Error::Infeasible(format!("{msg}; refine the action grid so obedience rows can be met")),
        other => other,
    })?;
    let p = &lp.problem;
    let n = p.n_states();
    let mut mass = vec![0.0; p.n_actions() * n];
    for (k, &(j, i)) in lp.cells.iter().enumerate() {
        mass[j * n + i] = sol.x[k];
    }
    let outcome = Outcome::from_mass(p, mass)?;
    let objective = outcome.objective(p);
    Ok(PrimalSolution {
        outcome,
        objective,
        row_duals: sol.y,
        iterations: sol.iterations,
        degenerate_basics: sol.degenerate_basics,
        pricing: opts.pricing,
    })
}
