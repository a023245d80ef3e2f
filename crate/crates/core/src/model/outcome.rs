use serde::{Deserialize, Serialize};

use super::posterior::Posterior;
use super::problem::{Problem, TieBreak};
use crate::error::{Error, Result};

/// Joint mass over the action × state grid, stored row-major by action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    n_actions: usize,
    n_states: usize,
    mass: Vec<f64>,
    /// Largest |column sum − prior|.
    pub marginal_residual: f64,
    /// Largest obedience violation over rows (|Σ u π| for equality rows, the negative part for inequality rows).
    pub obedience_residual: f64,
}

impl Outcome {
    pub fn from_mass(problem: &Problem, mass: Vec<f64>) -> Result<Self> {
        let (m, n) = (problem.n_actions(), problem.n_states());
        if mass.len() != m * n {
            return Err(Error::ShapeMismatch {
                field: "mass".into(),
                expected: format!("{m}x{n}"),
                found: mass.len().to_string(),
            });
        }
        let mut col = vec![0.0; n];
        let mut obedience: f64 = 0.0;
        for j in 0..m {
            let y = problem.action(j);
            let mut row = 0.0;
            for i in 0..n {
                let w = mass[j * n + i];
                col[i] += w;
                if w != 0.0 {
                    row += problem.u(y, problem.state(i)) * w;
                }
            }
            if problem.obedience_free(j) {
                continue;
            }
            let viol = match problem.tie_break() {
                TieBreak::StrictFoc => row.abs(),
                TieBreak::SenderFavorable => (-row).max(0.0),
            };
            obedience = obedience.max(viol);
        }
        let marginal = col.iter().zip(problem.prior()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok(Outcome { n_actions: m, n_states: n, mass, marginal_residual: marginal, obedience_residual: obedience })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    pub fn n_states(&self) -> usize {
        self.n_states
    }
    pub fn mass(&self, j: usize, i: usize) -> f64 {
        self.mass[j * self.n_states + i]
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }
    pub fn row(&self, j: usize) -> &[f64] {
        &self.mass[j * self.n_states..(j + 1) * self.n_states]
    }
    pub fn row_mass(&self, j: usize) -> f64 {
        self.row(j).iter().sum()
    }
    pub fn min_entry(&self) -> f64 {
        self.mass.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Actions whose row carries more than `tol` mass.
    pub fn active_rows(&self, tol: f64) -> Vec<usize> {
        (0..self.n_actions).filter(|&j| self.row_mass(j) > tol).collect()
    }

    /// States with mass above `tol` in row `j`.
    pub fn row_support(&self, j: usize, tol: f64) -> Vec<usize> {
        self.row(j).iter().enumerate().filter(|(_, w)| **w > tol).map(|(i, _)| i).collect()
    }

    /// Conditional belief of row `j`, restricted to entries above `tol`.
    pub fn row_posterior(&self, j: usize, tol: f64) -> Option<Posterior> {
        let sup = self.row_support(j, tol);
        if sup.is_empty() {
            return None;
        }
        let w = sup.iter().map(|&i| self.mass(j, i)).collect();
        Posterior::normalized(sup, w).ok()
    }

    pub fn objective(&self, problem: &Problem) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_actions {
            let y = problem.action(j);
            for (i, &w) in self.row(j).iter().enumerate() {
                if w != 0.0 {
                    total += w * problem.v(y, problem.state(i));
                }
            }
        }
        total
    }

    /// Distribution of recommended actions.
    pub fn action_marginal(&self) -> Vec<f64> {
        (0..self.n_actions).map(|j| self.row_mass(j)).collect()
    }

    /// Largest absolute entry-wise difference.
    pub fn sup_diff(&self, other: &Outcome) -> f64 {
        self.mass.iter().zip(&other.mass).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Total mass outside the cells `(j, i)` with `pred(j, i)` true.
    pub fn mass_outside(&self, pred: impl Fn(usize, usize) -> bool) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n_actions {
            for i in 0..self.n_states {
                if !pred(j, i) {
                    s += self.mass(j, i).abs();
                }
            }
        }
        s
    }
}
