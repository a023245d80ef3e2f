use serde::{Deserialize, Serialize};

use super::instance::{LpInstance, ObedienceKind, PrimalSolution};
use super::simplex::{self, SimplexOptions, SparseColumns, StandardLp};
use crate::error::{Error, Result};
use crate::model::{gamma, Outcome, Posterior, Problem};

/// Largest explicit dual LP (in cells) the fallback path will attempt.
const EXPLICIT_DUAL_CAP: usize = 2_500;
/// Mass below this is treated as zero when reading supports.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualSource {
    /// Read directly from the optimal simplex basis.
    Basis,
    /// q from the conditional-expectation formula on mass rows, p from the support cells.
    Canonical,
    /// Solved as a separate LP.
    ExplicitLp,
}

/// State prices p and obedience multipliers q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSystem {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Finite difference of q across neighbouring mass-carrying actions; `None` elsewhere.
    pub q_derivative: Vec<Option<f64>>,
    /// Most negative zero-profit slack p(x) − V(y,x) − q(y)u(y,x) over admissible cells.
    pub feasibility_residual: f64,
    pub dual_objective: f64,
    pub source: DualSource,
}

impl PriceSystem {
    pub fn slack(&self, problem: &Problem, j: usize, i: usize) -> f64 {
        let (y, x) = (problem.action(j), problem.state(i));
        self.p[i] - problem.v(y, x) - self.q[j] * problem.obedience_coef(j, i)
    }
}

fn min_slack(problem: &Problem, p: &[f64], q: &[f64], kind: ObedienceKind) -> f64 {
    let mut worst = f64::INFINITY;
    for j in 0..problem.n_actions() {
        let y = problem.action(j);
        for i in 0..problem.n_states() {
            let x = problem.state(i);
            if problem.is_forbidden(y, x) {
                continue;
            }
            worst = worst.min(p[i] - problem.v(y, x) - q[j] * problem.obedience_coef(j, i));
        }
        if kind == ObedienceKind::Inequality {
            worst = worst.min(q[j]);
        }
    }
    worst
}

fn dual_objective(problem: &Problem, p: &[f64]) -> f64 {
    p.iter().zip(problem.prior()).map(|(a, b)| a * b).sum()
}

fn q_derivative(problem: &Problem, outcome: &Outcome, q: &[f64]) -> Vec<Option<f64>> {
    let rows = outcome.active_rows(MASS_TOL);
    let mut d = vec![None; problem.n_actions()];
    if rows.len() < 2 {
        return d;
    }
    for (k, &j) in rows.iter().enumerate() {
        let (a, b) = if k == 0 {
            (rows[0], rows[1])
        } else if k + 1 == rows.len() {
            (rows[k - 1], rows[k])
        } else {
            (rows[k - 1], rows[k + 1])
        };
        d[j] = Some((q[b] - q[a]) / (problem.action(b) - problem.action(a)));
    }
    d
}

/// Prices pinned down by the primal support: q from the conditional-expectation
/// formula on each mass row, p from the zero-profit equation on support cells,
/// remaining q chosen inside their feasibility interval.
fn canonical_prices(problem: &Problem, outcome: &Outcome, kind: ObedienceKind) -> Option<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (problem.n_actions(), problem.n_states());
    let rows = outcome.active_rows(MASS_TOL);
    let mut q = vec![f64::NAN; m];
    for &j in &rows {
        if problem.obedience_free(j) {
            q[j] = 0.0;
            continue;
        }
        let y = problem.action(j);
        let (mut num, mut den) = (0.0, 0.0);
        for i in outcome.row_support(j, MASS_TOL) {
            let (w, x) = (outcome.mass(j, i), problem.state(i));
            num += w * problem.v_y(y, x);
            den += w * problem.u_y(y, x);
        }
        if !(den.abs() > 1e-14) {
            return None;
        }
        q[j] = -num / den;
        if kind == ObedienceKind::Inequality && q[j] < 0.0 {
            return None;
        }
    }
    let mut p = vec![f64::NAN; n];
    for &j in &rows {
        let y = problem.action(j);
        for i in outcome.row_support(j, MASS_TOL) {
            let x = problem.state(i);
            let val = problem.v(y, x) + q[j] * problem.obedience_coef(j, i);
            p[i] = if p[i].is_nan() { val } else { p[i].max(val) };
        }
    }
    for j in 0..m {
        if !q[j].is_nan() {
            continue;
        }
        let y = problem.action(j);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        if kind == ObedienceKind::Inequality {
            lo = 0.0;
        }
        for i in 0..n {
            let x = problem.state(i);
            if p[i].is_nan() || problem.is_forbidden(y, x) {
                continue;
            }
            let (uu, room) = (problem.obedience_coef(j, i), p[i] - problem.v(y, x));
            if uu > 0.0 {
                hi = hi.min(room / uu);
            } else if uu < 0.0 {
                lo = lo.max(room / uu);
            }
        }
        let below = rows.iter().rev().find(|&&r| r < j).copied();
        let above = rows.iter().find(|&&r| r > j).copied();
        let target = match (below, above) {
            (Some(a), Some(b)) => {
                let t = (y - problem.action(a)) / (problem.action(b) - problem.action(a));
                q[a] + t * (q[b] - q[a])
            }
            (Some(a), None) => q[a],
            (None, Some(b)) => q[b],
            (None, None) => 0.0,
        };
        q[j] = if lo > hi { 0.5 * (lo + hi) } else { target.clamp(lo, hi) };
        if !q[j].is_finite() {
            q[j] = if lo.is_finite() { lo } else if hi.is_finite() { hi } else { target };
        }
    }
    for i in 0..n {
        if p[i].is_nan() {
            let x = problem.state(i);
            p[i] = (0..m)
                .filter(|&j| !problem.is_forbidden(problem.action(j), x))
                .map(|j| problem.v(problem.action(j), x) + q[j] * problem.obedience_coef(j, i))
                .fold(f64::NEG_INFINITY, f64::max);
            if !p[i].is_finite() {
                p[i] = 0.0;
            }
        }
    }
    Some((p, q))
}

fn basis_prices(lp: &LpInstance, primal: &PrimalSolution) -> (Vec<f64>, Vec<f64>) {
    let n = lp.problem().n_states();
    let p = primal.row_duals[..n].to_vec();
    let q = primal.row_duals[n..].iter().map(|v| -v).collect();
    (p, q)
}

/// Dual LP solved directly; only attempted on small instances.
pub fn solve_dual_explicit(lp: &LpInstance) -> Result<(Vec<f64>, Vec<f64>)> {
    let problem = lp.problem();
    let (m, n) = (problem.n_actions(), problem.n_states());
    let cells = lp.cells();
    if cells.len() > EXPLICIT_DUAL_CAP {
        return Err(Error::DegenerateBasis(format!(
            "explicit dual LP needs {} rows, above the fallback cap {EXPLICIT_DUAL_CAP}",
            cells.len()
        )));
    }
    let free_q = lp.obedience() == ObedienceKind::Equality;
    // Variables: p⁺ (n), p⁻ (n), q⁺ (m), q⁻ (m if free), surplus per cell.
    let mut cols = SparseColumns::new();
    let mut c = Vec::new();
    let mut by_state: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut by_action: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (k, &(j, i)) in cells.iter().enumerate() {
        by_state[i].push(k);
        by_action[j].push(k);
    }
    for sign in [1.0, -1.0] {
        for i in 0..n {
            let e: Vec<(usize, f64)> = by_state[i].iter().map(|&k| (k, sign)).collect();
            cols.push(&e);
            c.push(-sign * problem.prior()[i]);
        }
    }
    let signs: &[f64] = if free_q { &[1.0, -1.0] } else { &[1.0] };
    for &sign in signs {
        for j in 0..m {
            let e: Vec<(usize, f64)> = by_action[j].iter().map(|&k| (k, -sign * lp.ucoef()[k])).collect();
            cols.push(&e);
            c.push(0.0);
        }
    }
    for k in 0..cells.len() {
        cols.push(&[(k, -1.0)]);
        c.push(0.0);
    }
    let std = StandardLp { n_rows: cells.len(), cols, b: lp.cost().to_vec(), c };
    let sol = simplex::solve(&std, &SimplexOptions::default())?;
    let p: Vec<f64> = (0..n).map(|i| sol.x[i] - sol.x[n + i]).collect();
    let q: Vec<f64> = (0..m)
        .map(|j| if free_q { sol.x[2 * n + j] - sol.x[2 * n + m + j] } else { sol.x[2 * n + j] })
        .collect();
    Ok((p, q))
}

/// Dual prices for an optimal primal solution.
///
/// Prefers the support-pinned canonical prices whenever they are feasible and
/// close the duality gap; otherwise returns the basis duals, and as a last
/// resort solves the dual LP explicitly.
pub fn solve_dual(lp: &LpInstance, primal: &PrimalSolution) -> Result<PriceSystem> {
    let problem = lp.problem();
    let kind = lp.obedience();
    let gap_tol = 1e-8 * (1.0 + primal.objective.abs());
    let build = |p: Vec<f64>, q: Vec<f64>, source| {
        let feas = min_slack(problem, &p, &q, kind);
        let obj = dual_objective(problem, &p);
        let qd = q_derivative(problem, &primal.outcome, &q);
        PriceSystem { p, q, q_derivative: qd, feasibility_residual: feas, dual_objective: obj, source }
    };
    if let Some((p, q)) = canonical_prices(problem, &primal.outcome, kind) {
        let ps = build(p, q, DualSource::Canonical);
        if ps.feasibility_residual >= -1e-9 && (ps.dual_objective - primal.objective).abs() <= gap_tol {
            return Ok(ps);
        }
    }
    let (p, q) = basis_prices(lp, primal);
    let ps = build(p, q, DualSource::Basis);
    if ps.feasibility_residual >= -1e-7 && ps.p.iter().chain(&ps.q).all(|v| v.is_finite()) {
        return Ok(ps);
    }
    let (p, q) = solve_dual_explicit(lp)?;
    Ok(build(p, q, DualSource::ExplicitLp))
}

/// One action row of the contact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactRow {
    pub action: usize,
    pub states: Vec<usize>,
    /// Obedient posterior on the row's states, when it has at most two of them.
    pub posterior: Option<Posterior>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSet {
    pub pairs: Vec<(usize, usize)>,
    pub rows: Vec<ContactRow>,
    pub tol: f64,
}

impl ContactSet {
    pub fn contains(&self, j: usize, i: usize) -> bool {
        self.pairs.binary_search(&(j, i)).is_ok()
    }
    /// The rows whose action carries outcome mass above `tol`.
    ///
    /// Prices of unused actions are only bounded by feasibility, so their contact
    /// states depend on which dual solution was picked.
    pub fn on_support(&self, outcome: &Outcome, tol: f64) -> ContactSet {
        let active = outcome.active_rows(tol);
        let rows: Vec<ContactRow> = self.rows.iter().filter(|r| active.binary_search(&r.action).is_ok()).cloned().collect();
        let pairs = rows.iter().flat_map(|r| r.states.iter().map(move |&i| (r.action, i))).collect();
        ContactSet { pairs, rows, tol: self.tol }
    }
    /// Rows on which some belief supported on the contact states is obedient.
    pub fn obedient_rows<'a>(&'a self, problem: &'a Problem) -> impl Iterator<Item = &'a ContactRow> + 'a {
        self.rows.iter().filter(move |r| row_is_obedient(problem, r))
    }
}

fn row_is_obedient(problem: &Problem, row: &ContactRow) -> bool {
    let y = problem.action(row.action);
    let us: Vec<f64> = row.states.iter().map(|&i| problem.u(y, problem.state(i))).collect();
    let tiny = 1e-12;
    us.iter().any(|v| v.abs() <= tiny) || (us.iter().any(|&v| v < 0.0) && us.iter().any(|&v| v > 0.0))
}

/// Two-state obedient weights: mass u(y,b)/(u(y,b) − u(y,a)) on the state with u(y,a) < 0.
pub fn pair_posterior(problem: &Problem, j: usize, states: &[usize]) -> Option<Posterior> {
    let y = problem.action(j);
    match states {
        [i] => (problem.u(y, problem.state(*i)).abs() <= 1e-12).then(|| Posterior::degenerate(*i)),
        [a, b] => {
            let (ua, ub) = (problem.u(y, problem.state(*a)), problem.u(y, problem.state(*b)));
            if ua < 0.0 && ub > 0.0 || ua > 0.0 && ub < 0.0 {
                let wa = ub / (ub - ua);
                Posterior::new(vec![*a, *b], vec![wa, 1.0 - wa]).ok()
            } else {
                None
            }
        }
        _ => None,
    }
}

pub fn default_contact_tol(problem: &Problem) -> f64 {
    1e-6 * problem.scale()
}

/// Cells whose zero-profit slack is at most `tol`.
pub fn contact_set(problem: &Problem, prices: &PriceSystem, tol: f64) -> ContactSet {
    let mut pairs = Vec::new();
    let mut rows = Vec::new();
    for j in 0..problem.n_actions() {
        let y = problem.action(j);
        let states: Vec<usize> = (0..problem.n_states())
            .filter(|&i| !problem.is_forbidden(y, problem.state(i)) && prices.slack(problem, j, i) <= tol)
            .collect();
        if states.is_empty() {
            continue;
        }
        pairs.extend(states.iter().map(|&i| (j, i)));
        let posterior = pair_posterior(problem, j, &states);
        rows.push(ContactRow { action: j, states, posterior });
    }
    ContactSet { pairs, rows, tol }
}

/// Best least-squares fit of V_y + q·u_y + q′·u = 0 over the support of `mu` at y = γ(μ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocFit {
    pub y: f64,
    pub q: f64,
    pub q_prime: f64,
    pub max_residual: f64,
}

pub fn foc_fit(problem: &Problem, mu: &Posterior) -> Result<FocFit> {
    let y = gamma(problem, mu)?;
    let rows: Vec<[f64; 3]> = mu
        .support()
        .iter()
        .map(|&i| {
            let x = problem.state(i);
            [problem.u_y(y, x), problem.u(y, x), -problem.v_y(y, x)]
        })
        .collect();
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        a11 += r[0] * r[0];
        a12 += r[0] * r[1];
        a22 += r[1] * r[1];
        b1 += r[0] * r[2];
        b2 += r[1] * r[2];
    }
    let det = a11 * a22 - a12 * a12;
    let (q, qp) = if det.abs() > 1e-14 * (a11 * a22).max(1e-300) {
        ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
    } else if a11 > 0.0 {
        (b1 / a11, 0.0)
    } else {
        (0.0, 0.0)
    };
    let max_residual = rows.iter().map(|r| (r[0] * q + r[1] * qp - r[2]).abs()).fold(0.0, f64::max);
    Ok(FocFit { y, q, q_prime: qp, max_residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsRow {
    pub action: usize,
    pub y: f64,
    pub mass: f64,
    pub support: Vec<usize>,
    /// |q(y) + ∫V_y dμ / ∫u_y dμ| on the row's conditional belief.
    pub q_residual: f64,
    /// max over support of |V_y + q u_y + q′ u| with the finite-difference q′.
    pub foc_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsReport {
    pub rows: Vec<CsRow>,
    pub max_q_residual: f64,
    pub max_foc_residual: f64,
    /// Mass-carrying cells whose slack exceeds the contact tolerance.
    pub support_outside_contact: usize,
    pub max_support_slack: f64,
    pub feasibility_residual: f64,
    pub duality_gap: f64,
}

impl CsReport {
    pub fn passes(&self, tol_q: f64, tol_foc: f64) -> bool {
        self.max_q_residual <= tol_q && self.max_foc_residual <= tol_foc && self.support_outside_contact == 0
    }
}

pub fn verify_complementary_slackness(
    problem: &Problem,
    outcome: &Outcome,
    prices: &PriceSystem,
    contact_tol: f64,
) -> CsReport {
    let mut rows = Vec::new();
    let mut outside = 0;
    let mut max_slack: f64 = 0.0;
    for j in outcome.active_rows(MASS_TOL) {
        let y = problem.action(j);
        let support = outcome.row_support(j, MASS_TOL);
        let (mut num, mut den) = (0.0, 0.0);
        for &i in &support {
            let (w, x) = (outcome.mass(j, i), problem.state(i));
            num += w * problem.v_y(y, x);
            den += w * problem.u_y(y, x);
            let s = prices.slack(problem, j, i);
            max_slack = max_slack.max(s.abs());
            if s > contact_tol {
                outside += 1;
            }
        }
        let q_residual = if den != 0.0 { (prices.q[j] + num / den).abs() } else { f64::INFINITY };
        let foc_residual = prices.q_derivative[j].map(|qp| {
            support
                .iter()
                .map(|&i| {
                    let x = problem.state(i);
                    (problem.v_y(y, x) + prices.q[j] * problem.u_y(y, x) + qp * problem.u(y, x)).abs()
                })
                .fold(0.0, f64::max)
        });
        rows.push(CsRow { action: j, y, mass: outcome.row_mass(j), support, q_residual, foc_residual });
    }
    let max_q = rows.iter().map(|r| r.q_residual).fold(0.0, f64::max);
    let max_foc = rows.iter().filter_map(|r| r.foc_residual).fold(0.0, f64::max);
    CsReport {
        rows,
        max_q_residual: max_q,
        max_foc_residual: max_foc,
        support_outside_contact: outside,
        max_support_slack: max_slack,
        feasibility_residual: prices.feasibility_residual,
        duality_gap: (prices.dual_objective - outcome.objective(problem)).abs(),
    }
}
