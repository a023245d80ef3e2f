use serde::{Deserialize, Serialize};

use super::problem::{OrderingMode, Problem, TieBreak};

/// Which standing assumption a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssumptionId {
    /// Smoothness of V and u.
    A1,
    /// Strict aggregate single crossing of u in y.
    A2,
    /// The receiver's optimal action lies inside the action range.
    A3,
    /// V_y > 0 and u_x > 0 (or declared single crossing in x).
    A4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: AssumptionId,
    /// Grid coordinates involved, `[y, x]` or `[y, x, x']`.
    pub points: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub smooth_ok: bool,
    pub asc_ok: bool,
    pub interior_ok: bool,
    pub ordering_ok: bool,
    /// A few violations per assumption, grid-lexicographic order.
    pub violations: Vec<Violation>,
    /// Total number of violating grid cells or pairs, indexed A1..A4.
    pub violation_counts: [usize; 4],
}

impl AssumptionReport {
    pub fn flags(&self) -> [bool; 4] {
        [self.smooth_ok, self.asc_ok, self.interior_ok, self.ordering_ok]
    }
}

const KEEP: usize = 8;

struct Collector {
    violations: Vec<Violation>,
    counts: [usize; 4],
}

impl Collector {
    fn push(&mut self, id: AssumptionId, points: Vec<f64>, residual: f64) {
        let k = id as usize;
        self.counts[k] += 1;
        if self.counts[k] <= KEEP {
            self.violations.push(Violation { assumption: id, points, residual });
        }
    }
}

/// Grid check of the four standing assumptions.
///
/// Aggregate single crossing uses the pairwise characterization: every zero of
/// u has u_y < 0, and for u(y,x) < 0 < u(y,x') the combination
/// u(y,x')u_y(y,x) − u(y,x)u_y(y,x') is negative.
pub fn check_assumptions(problem: &Problem) -> AssumptionReport {
    let mut c = Collector { violations: Vec::new(), counts: [0; 4] };
    if !problem.declared_smooth() {
        c.push(AssumptionId::A1, vec![], 0.0);
    }

    let xs = problem.states().points();
    let ys = problem.actions().points();
    let u_scale = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (y, x)))
        .map(|(y, x)| problem.u(y, x).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let zero_tol = 1e-12 * u_scale;

    for &y in ys {
        let us: Vec<f64> = xs.iter().map(|&x| problem.u(y, x)).collect();
        let uys: Vec<f64> = xs.iter().map(|&x| problem.u_y(y, x)).collect();
        for (i, &x) in xs.iter().enumerate() {
            if us[i].abs() <= zero_tol && !(uys[i] < 0.0) {
                c.push(AssumptionId::A2, vec![y, x], uys[i]);
            }
        }
        for i in 0..xs.len() {
            if !(us[i] < -zero_tol) {
                continue;
            }
            for k in 0..xs.len() {
                if !(us[k] > zero_tol) {
                    continue;
                }
                let r = us[k] * uys[i] - us[i] * uys[k];
                if !(r < 0.0) {
                    c.push(AssumptionId::A2, vec![y, xs[i], xs[k]], r);
                }
            }
        }
    }

    let (ylo, yhi) = problem.action_range();
    let min_lo = xs.iter().map(|&x| problem.u(ylo, x)).fold(f64::INFINITY, f64::min);
    let max_hi = xs.iter().map(|&x| problem.u(yhi, x)).fold(f64::NEG_INFINITY, f64::max);
    let tol3 = 1e-9 * u_scale;
    if min_lo < -tol3 {
        c.push(AssumptionId::A3, vec![ylo], min_lo);
    }
    if problem.tie_break() == TieBreak::StrictFoc && max_hi > tol3 {
        c.push(AssumptionId::A3, vec![yhi], max_hi);
    }

    for &y in ys {
        for &x in xs {
            if problem.is_forbidden(y, x) {
                continue;
            }
            let vy = problem.v_y(y, x);
            if !(vy > 0.0) {
                c.push(AssumptionId::A4, vec![y, x], vy);
            }
        }
    }
    match problem.ordering() {
        OrderingMode::Supermodular => {
            for &y in ys {
                for &x in xs {
                    let ux = problem.u_x(y, x);
                    if !(ux > 0.0) {
                        c.push(AssumptionId::A4, vec![y, x], ux);
                    }
                }
            }
        }
        OrderingMode::SingleCrossing => {
            for &y in ys {
                let signs: Vec<f64> =
                    xs.iter().map(|&x| problem.u(y, x)).filter(|v| v.abs() > zero_tol).map(f64::signum).collect();
                let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
                if changes > 1 {
                    c.push(AssumptionId::A4, vec![y], changes as f64);
                }
            }
        }
    }

    AssumptionReport {
        smooth_ok: c.counts[0] == 0,
        asc_ok: c.counts[1] == 0,
        interior_ok: c.counts[2] == 0,
        ordering_ok: c.counts[3] == 0,
        violations: c.violations,
        violation_counts: c.counts,
    }
}
