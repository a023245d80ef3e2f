use rayon::prelude::*;
use serde::Serialize;

use crate::model::{chi, Problem};

/// det of the matrix whose rows are V_y, u and u_y evaluated at (y, x1), (y, x2), (y, x3).
pub fn twist_determinant(problem: &Problem, y: f64, x1: f64, x2: f64, x3: f64) -> f64 {
    let col = |x: f64| [problem.v_y(y, x), problem.u(y, x), problem.u_y(y, x)];
    det3(col(x1), col(x2), col(x3))
}

pub(crate) fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwistTriple {
    pub y: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// |S| divided by (x2 − x1)(x3 − x2)(x3 − x1).
    pub normalized_det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TwistVerdict {
    HoldsPositive,
    HoldsNegative,
    /// A vanishing determinant, or one triple of each sign.
    Fails { witness: TwistTriple, opposite: Option<TwistTriple> },
}

impl TwistVerdict {
    pub fn holds(&self) -> bool {
        !matches!(self, TwistVerdict::Fails { .. })
    }
    pub fn label(&self) -> &'static str {
        match self {
            TwistVerdict::HoldsPositive => "holds_positive",
            TwistVerdict::HoldsNegative => "holds_negative",
            TwistVerdict::Fails { .. } => "fails",
        }
    }
}

#[derive(Default)]
struct Scan {
    max_abs: f64,
    first_pos: Option<(usize, TwistTriple)>,
    first_neg: Option<(usize, TwistTriple)>,
    smallest: Option<(f64, usize, TwistTriple)>,
}

/// Sweeps every grid action and every grid triple x1 < x2 < x3 with x1 < χ(y) < x3.
///
/// A determinant counts as zero when its normalized magnitude is below 1e−8 of the
/// largest one seen. Witnesses come from the lowest action that has an offender.
pub fn check_twist(problem: &Problem) -> TwistVerdict {
    let xs = problem.states().points();
    let n = xs.len();
    let scans: Vec<Scan> = (0..problem.n_actions())
        .into_par_iter()
        .map(|j| {
            let y = problem.action(j);
            let mut s = Scan::default();
            let Ok(c) = chi(problem, y) else { return s };
            let cols: Vec<[f64; 3]> = xs.iter().map(|&x| [problem.v_y(y, x), problem.u(y, x), problem.u_y(y, x)]).collect();
            let mut order = 0usize;
            for a in 0..n {
                if xs[a] >= c {
                    break;
                }
                for cc in (a + 2..n).filter(|&k| xs[k] > c) {
                    for b in a + 1..cc {
                        let d = det3(cols[a], cols[b], cols[cc]);
                        let norm = d / ((xs[b] - xs[a]) * (xs[cc] - xs[b]) * (xs[cc] - xs[a]));
                        let t = TwistTriple { y, x1: xs[a], x2: xs[b], x3: xs[cc], normalized_det: norm };
                        s.max_abs = s.max_abs.max(norm.abs());
                        if norm > 0.0 && s.first_pos.is_none() {
                            s.first_pos = Some((order, t));
                        }
                        if norm < 0.0 && s.first_neg.is_none() {
                            s.first_neg = Some((order, t));
                        }
                        if s.smallest.as_ref().is_none_or(|m| norm.abs() < m.0) {
                            s.smallest = Some((norm.abs(), order, t));
                        }
                        order += 1;
                    }
                }
            }
            s
        })
        .collect();
    let max_abs = scans.iter().map(|s| s.max_abs).fold(0.0, f64::max);
    let zero_tol = 1e-8 * max_abs;
    if let Some(t) = scans.iter().find_map(|s| s.smallest.filter(|m| m.0 <= zero_tol).map(|m| m.2)) {
        return TwistVerdict::Fails { witness: t, opposite: None };
    }
    let pos = scans.iter().find_map(|s| s.first_pos.map(|p| p.1));
    let neg = scans.iter().find_map(|s| s.first_neg.map(|p| p.1));
    match (pos, neg) {
        (Some(p), Some(q)) => TwistVerdict::Fails { witness: p, opposite: Some(q) },
        (Some(_), None) => TwistVerdict::HoldsPositive,
        (None, Some(_)) => TwistVerdict::HoldsNegative,
        (None, None) => TwistVerdict::HoldsPositive,
    }
}
