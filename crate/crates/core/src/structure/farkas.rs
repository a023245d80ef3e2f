use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::simplex::{self, SimplexOptions, SparseColumns, StandardLp};
use crate::model::{chi, Problem};

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FarkasVerdict {
    /// Some α > 0 has αR ≤ 0: no profitable perturbation.
    AlphaExists,
    /// Some β ≥ 0 has Rβ ≥ 0, Rβ ≠ 0: a profitable re-pairing.
    BetaExists,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarkasCertificate {
    pub r: Matrix3,
    pub verdict: FarkasVerdict,
    pub alpha: Option<[f64; 3]>,
    pub beta: Option<[f64; 3]>,
}

/// The perturbation matrix for actions y1 < y2 and states x1 < x2 < x3.
pub fn perturbation_matrix(problem: &Problem, y1: f64, y2: f64, x: [f64; 3]) -> Matrix3 {
    let dv = |xi: f64| problem.v(y2, xi) - problem.v(y1, xi);
    [
        [dv(x[0]), -dv(x[1]), dv(x[2])],
        [-problem.u(y1, x[0]), problem.u(y1, x[1]), -problem.u(y1, x[2])],
        [problem.u(y2, x[0]), -problem.u(y2, x[1]), problem.u(y2, x[2])],
    ]
}

/// Builds the perturbation matrix for the given actions and states and decides which alternative holds.
pub fn farkas_certificate(problem: &Problem, y1: f64, y2: f64, x1: f64, x2: f64, x3: f64) -> Result<FarkasCertificate> {
    if !(y1 < y2) || !(x1 < x2 && x2 < x3) {
        return Err(Error::IllPosed(format!("need y1 < y2 and x1 < x2 < x3, got y = ({y1}, {y2}), x = ({x1}, {x2}, {x3})")));
    }
    let c = chi(problem, y1)?;
    if !(x1 < c && c < x3) {
        return Err(Error::IllPosed(format!("χ(y1) = {c} is not strictly between x1 = {x1} and x3 = {x3}")));
    }
    decide_alternative(perturbation_matrix(problem, y1, y2, [x1, x2, x3]))
}

fn r_beta(r: &Matrix3, b: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| r[i][k] * b[k]).sum())
}

fn alpha_r(r: &Matrix3, a: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|k| (0..3).map(|i| a[i] * r[i][k]).sum())
}

/// max 1ᵀRβ subject to Rβ ≥ 0 and 0 ≤ β ≤ 1.
fn best_beta(r: &Matrix3) -> Result<[f64; 3]> {
    // Columns: β (3), s = Rβ (3), w = 1 − β (3). Rows: Rβ − s = 0, β + w = 1.
    let mut cols = SparseColumns::new();
    let mut c = Vec::new();
    for k in 0..3 {
        let mut e: Vec<(usize, f64)> = (0..3).map(|i| (i, r[i][k])).collect();
        e.push((3 + k, 1.0));
        cols.push(&e);
        c.push((0..3).map(|i| r[i][k]).sum::<f64>());
    }
    for i in 0..3 {
        cols.push(&[(i, -1.0)]);
        c.push(0.0);
    }
    for k in 0..3 {
        cols.push(&[(3 + k, 1.0)]);
        c.push(0.0);
    }
    let lp = StandardLp { n_rows: 6, cols, b: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], c };
    let sol = simplex::solve(&lp, &SimplexOptions::default())?;
    Ok([sol.x[0], sol.x[1], sol.x[2]])
}

/// α ≥ 1 componentwise with αR ≤ 0, if one exists.
fn find_alpha(r: &Matrix3) -> Option<[f64; 3]> {
    // α = 1 + a with a ≥ 0; rows k: Σ_i a_i R_ik + z_k = −Σ_i R_ik with z ≥ 0.
    let mut cols = SparseColumns::new();
    let mut c = Vec::new();
    for i in 0..3 {
        let e: Vec<(usize, f64)> = (0..3).map(|k| (k, r[i][k])).collect();
        cols.push(&e);
        c.push(-1.0);
    }
    for k in 0..3 {
        cols.push(&[(k, 1.0)]);
        c.push(0.0);
    }
    let b = [0, 1, 2].map(|k| -(0..3).map(|i| r[i][k]).sum::<f64>()).to_vec();
    let lp = StandardLp { n_rows: 3, cols, b, c };
    let sol = simplex::solve(&lp, &SimplexOptions::default()).ok()?;
    Some([1.0 + sol.x[0], 1.0 + sol.x[1], 1.0 + sol.x[2]])
}

/// Decides the theorem of alternatives for a 3×3 matrix R.
///
/// The β-LP is solved first; a positive optimum (above 1e−9 relative to the largest
/// entry of R) yields β. Otherwise an α ≥ 1 with αR ≤ 0 is computed.
pub fn decide_alternative(r: Matrix3) -> Result<FarkasCertificate> {
    let scale = r.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Ok(FarkasCertificate { r, verdict: FarkasVerdict::AlphaExists, alpha: Some([1.0; 3]), beta: None });
    }
    let beta = best_beta(&r)?;
    let rb = r_beta(&r, &beta);
    if rb.iter().sum::<f64>() > 1e-9 * scale && rb.iter().all(|&v| v >= -1e-12 * scale) {
        let beta = beta.map(|b| b.max(0.0));
        return Ok(FarkasCertificate { r, verdict: FarkasVerdict::BetaExists, alpha: None, beta: Some(beta) });
    }
    match find_alpha(&r) {
        Some(alpha) => Ok(FarkasCertificate { r, verdict: FarkasVerdict::AlphaExists, alpha: Some(alpha), beta: None }),
        None => Err(Error::Internal(format!("neither alternative certified for R = {r:?}"))),
    }
}

impl FarkasCertificate {
    /// Largest component of αR (for α) or the most negative component of Rβ (for β), by direct multiplication.
    pub fn residual(&self) -> f64 {
        match (self.alpha, self.beta) {
            (Some(a), _) => alpha_r(&self.r, &a).into_iter().fold(f64::NEG_INFINITY, f64::max),
            (_, Some(b)) => -r_beta(&self.r, &b).into_iter().fold(f64::INFINITY, f64::min),
            _ => f64::NAN,
        }
    }

    pub fn r_beta(&self) -> Option<[f64; 3]> {
        self.beta.map(|b| r_beta(&self.r, &b))
    }

    pub fn alpha_r(&self) -> Option<[f64; 3]> {
        self.alpha.map(|a| alpha_r(&self.r, &a))
    }
}
