use rayon::prelude::*;
use serde::Serialize;

use super::sdpd::{check_sdpd_sufficient, SdpdLabel};
use crate::model::{chi, gamma, Family, Posterior, Problem, TieBreak};

/// Coarse ρ resolution for the pair sweeps.
pub const RHO_STEPS: usize = 64;
/// Resolution used to re-examine near ties.
pub const RHO_STEPS_FINE: usize = 512;

const STRICT_TOL: f64 = 1e-8;
/// Pairs whose best normalized gap lies within this multiple of the strict tolerance are refined.
const NEAR_TIE: f64 = 1e4;

/// V(γ(δ_x), x) for every state where the degenerate posterior has a best response,
/// plus u on the grid for sender-favourable problems, whose γ is a scan over grid actions.
struct Degenerate {
    value: Vec<Option<f64>>,
    u_table: Option<Vec<Vec<f64>>>,
}

impl Degenerate {
    fn new(problem: &Problem) -> Self {
        let value = (0..problem.n_states())
            .map(|i| {
                let x = problem.state(i);
                gamma(problem, &Posterior::degenerate(i)).ok().map(|y| problem.v(y, x))
            })
            .collect();
        let u_table = (problem.tie_break() == TieBreak::SenderFavorable).then(|| {
            let xs = problem.states().points();
            problem.actions().points().iter().map(|&y| xs.iter().map(|&x| problem.u(y, x)).collect()).collect()
        });
        Degenerate { value, u_table }
    }

    fn pair_gamma(&self, problem: &Problem, a: usize, b: usize, rho: f64) -> Option<f64> {
        match &self.u_table {
            Some(t) => {
                let j = (0..t.len()).rev().find(|&j| rho * t[j][a] + (1.0 - rho) * t[j][b] >= -1e-12).unwrap_or(0);
                Some(problem.action(j))
            }
            None => gamma(problem, &Posterior::new(vec![a, b], vec![rho, 1.0 - rho]).ok()?).ok(),
        }
    }
}

/// Pooling gain of μ = ρδ_x1 + (1 − ρ)δ_x2 over disclosing both states, divided by ρ(1 − ρ)(x2 − x1)².
fn normalized_gain(problem: &Problem, deg: &Degenerate, a: usize, b: usize, rho: f64) -> Option<f64> {
    let (va, vb) = (deg.value[a]?, deg.value[b]?);
    let y = deg.pair_gamma(problem, a, b, rho)?;
    let (xa, xb) = (problem.state(a), problem.state(b));
    let pooled = rho * problem.v(y, xa) + (1.0 - rho) * problem.v(y, xb);
    let disclosed = rho * va + (1.0 - rho) * vb;
    Some((pooled - disclosed) / (rho * (1.0 - rho) * (xb - xa).powi(2)))
}

#[derive(Clone, Copy, Debug)]
struct PairScan {
    /// Largest normalized gain and the ρ attaining it.
    best: f64,
    best_rho: f64,
    evaluated: bool,
}

fn scan_pair(problem: &Problem, deg: &Degenerate, a: usize, b: usize, steps: usize) -> PairScan {
    let mut s = PairScan { best: f64::NEG_INFINITY, best_rho: f64::NAN, evaluated: false };
    for k in 1..steps {
        let rho = k as f64 / steps as f64;
        if let Some(g) = normalized_gain(problem, deg, a, b, rho) {
            s.evaluated = true;
            if g > s.best {
                s.best = g;
                s.best_rho = rho;
            }
        }
    }
    s
}

/// Scans every pair of states, refining pairs whose best gain is close to the tolerance.
fn sweep_pairs(problem: &Problem, tol: f64) -> Vec<(usize, usize, PairScan)> {
    let deg = Degenerate::new(problem);
    let n = problem.n_states();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let deg = &deg;
            (a + 1..n).map(move |b| {
                let mut s = scan_pair(problem, deg, a, b, RHO_STEPS);
                if s.evaluated && s.best.abs() <= NEAR_TIE * tol {
                    s = scan_pair(problem, deg, a, b, RHO_STEPS_FINE);
                }
                (a, b, s)
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FullDisclosureVerdict {
    Optimal,
    OptimalUnique,
    NotOptimal { x1: f64, x2: f64, rho: f64, normalized_gain: f64 },
}

impl FullDisclosureVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            FullDisclosureVerdict::Optimal => "optimal",
            FullDisclosureVerdict::OptimalUnique => "optimal_unique",
            FullDisclosureVerdict::NotOptimal { .. } => "not_optimal",
        }
    }
    pub fn is_optimal(&self) -> bool {
        !matches!(self, FullDisclosureVerdict::NotOptimal { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    PairSweep,
    /// Linear receiver with V convex in y and V(x1,x2) + V(x2,x1) ≤ V(x1,x1) + V(x2,x2).
    LinearReceiverShortcut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullDisclosureReport {
    pub verdict: FullDisclosureVerdict,
    pub decided_by: DecidedBy,
    /// Outcome of the linear-receiver shortcut, when it applies to the problem.
    pub shortcut: Option<bool>,
    /// Largest normalized pooling gain seen over all pairs and ρ.
    pub max_normalized_gain: f64,
    /// Pairs with no evaluable ρ (no best response on the action range).
    pub skipped_pairs: usize,
}

fn linear_receiver_shortcut(problem: &Problem) -> Option<bool> {
    if problem.family() != Family::LinearReceiver {
        return None;
    }
    let xs = problem.states().points();
    let ys = problem.actions().points();
    let vyy: Vec<f64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| problem.v_yy(y, x))).collect();
    let curv = vyy.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
    let convex = vyy.iter().all(|&d| d >= -STRICT_TOL * curv);
    let tol = STRICT_TOL * problem.scale();
    let sorted = xs.iter().enumerate().all(|(a, &x1)| {
        xs[a + 1..].iter().all(|&x2| {
            problem.v(x1, x2) + problem.v(x2, x1) <= problem.v(x1, x1) + problem.v(x2, x2) + tol
        })
    });
    Some(convex && sorted)
}

/// Pair-and-ρ sweep of the full-disclosure inequality, with the linear-receiver shortcut alongside.
///
/// Gains are normalized by ρ(1 − ρ)(x2 − x1)² and compared with 1e−8 times the
/// problem scale. Uniqueness needs every sampled gain strictly below −tol.
pub fn check_full_disclosure(problem: &Problem) -> FullDisclosureReport {
    let tol = STRICT_TOL * problem.scale();
    let scans = sweep_pairs(problem, tol);
    let mut max_gain = f64::NEG_INFINITY;
    let mut skipped = 0usize;
    let mut violation = None;
    let mut strict = true;
    for &(a, b, s) in &scans {
        if !s.evaluated {
            skipped += 1;
            continue;
        }
        max_gain = max_gain.max(s.best);
        strict &= s.best < -tol;
        if s.best > tol && violation.is_none() {
            violation = Some(FullDisclosureVerdict::NotOptimal {
                x1: problem.state(a),
                x2: problem.state(b),
                rho: s.best_rho,
                normalized_gain: s.best,
            });
        }
    }
    let sweep = match violation {
        Some(v) => v,
        None if strict => FullDisclosureVerdict::OptimalUnique,
        None => FullDisclosureVerdict::Optimal,
    };
    let shortcut = linear_receiver_shortcut(problem);
    let decided_by = match (shortcut, &sweep) {
        (Some(true), FullDisclosureVerdict::Optimal) => DecidedBy::LinearReceiverShortcut,
        _ => DecidedBy::PairSweep,
    };
    FullDisclosureReport { verdict: sweep, decided_by, shortcut, max_normalized_gain: max_gain, skipped_pairs: skipped }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NadVerdict {
    Holds,
    /// `y` is the failing action; the direct sweep also reports the pair of states that no ρ separates.
    Fails { y: f64, x1: Option<f64>, x2: Option<f64> },
}

impl NadVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            NadVerdict::Holds => "holds",
            NadVerdict::Fails { .. } => "fails",
        }
    }
    pub fn holds(&self) -> bool {
        matches!(self, NadVerdict::Holds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NadCriterion {
    /// Pointwise curvature inequality at (y, χ(y)), valid under the strict single-dipped condition.
    Local,
    /// For every pair x1 < x2 some sampled ρ makes pooling strictly better than disclosure.
    PairSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NadConditionReport {
    pub verdict: NadVerdict,
    pub criterion: NadCriterion,
    pub sdpd: SdpdLabel,
    /// Actions (local criterion) or pairs (sweep) that could not be evaluated.
    pub skipped: usize,
}

/// Slack of the local inequality at (y, χ(y)): right side minus left side, or None when a divisor vanishes.
pub fn local_nad_margin(problem: &Problem, y: f64) -> Option<f64> {
    let x = chi(problem, y).ok()?;
    let (uy, ux) = (problem.u_y(y, x), problem.u_x(y, x));
    if uy.abs() < 1e-12 || ux.abs() < 1e-12 {
        return None;
    }
    let vy = problem.v_y(y, x);
    let rhs = vy * problem.u_yy(y, x) / uy + 2.0 * (problem.v_yx(y, x) * uy - vy * problem.u_yx(y, x)) / ux;
    Some(rhs - problem.v_yy(y, x))
}

fn check_local(problem: &Problem, sdpd: SdpdLabel) -> NadConditionReport {
    let margins: Vec<(f64, Option<f64>)> =
        problem.actions().points().par_iter().map(|&y| (y, local_nad_margin(problem, y))).collect();
    let mut skipped = 0;
    let mut verdict = NadVerdict::Holds;
    for (y, m) in margins {
        match m {
            None => skipped += 1,
            Some(m) if m < -STRICT_TOL * m.abs().max(1.0) && verdict.holds() => {
                verdict = NadVerdict::Fails { y, x1: None, x2: None };
            }
            Some(_) => {}
        }
    }
    NadConditionReport { verdict, criterion: NadCriterion::Local, sdpd, skipped }
}

fn check_pairs(problem: &Problem, sdpd: SdpdLabel) -> NadConditionReport {
    let tol = STRICT_TOL * problem.scale();
    let scans = sweep_pairs(problem, tol);
    let mut skipped = 0;
    let mut verdict = NadVerdict::Holds;
    for &(a, b, s) in &scans {
        if !s.evaluated {
            skipped += 1;
            continue;
        }
        if s.best <= tol && verdict.holds() {
            let half = Posterior::new(vec![a, b], vec![0.5, 0.5]).ok();
            let y = half.and_then(|mu| gamma(problem, &mu).ok()).unwrap_or(f64::NAN);
            verdict = NadVerdict::Fails { y, x1: Some(problem.state(a)), x2: Some(problem.state(b)) };
        }
    }
    NadConditionReport { verdict, criterion: NadCriterion::PairSweep, sdpd, skipped }
}

/// Checks that every pair of states has a mixing weight at which pooling strictly beats disclosure.
///
/// Under the strict single-dipped condition the pointwise curvature inequality at
/// each grid action is used; otherwise the pair sweep is run directly.
pub fn check_nad_condition(problem: &Problem) -> NadConditionReport {
    let sdpd = check_sdpd_sufficient(problem).label;
    if sdpd == SdpdLabel::DippedStrict {
        check_local(problem, sdpd)
    } else {
        check_pairs(problem, sdpd)
    }
}

/// The pair sweep alone, regardless of the strict single-dipped condition.
pub fn check_nad_pairs(problem: &Problem) -> NadConditionReport {
    check_pairs(problem, check_sdpd_sufficient(problem).label)
}
