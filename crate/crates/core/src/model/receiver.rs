use super::outcome::Outcome;
use super::posterior::{Posterior, Signal};
use super::problem::{Problem, TieBreak};
use crate::error::{Error, Result};

pub const ROOT_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

/// ∫u(y, x) dμ.
pub fn foc_value(problem: &Problem, mu: &Posterior, y: f64) -> f64 {
    mu.iter().map(|(i, w)| w * problem.u(y, problem.state(i))).sum()
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `increasing` gives the direction of the crossing.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    let sign = if increasing { -1.0 } else { 1.0 };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if sign * fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() < f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// The receiver's optimal action at belief `mu`.
pub fn gamma(problem: &Problem, mu: &Posterior) -> Result<f64> {
    match problem.tie_break() {
        TieBreak::SenderFavorable => problem
            .actions()
            .points()
            .iter()
            .rev()
            .copied()
            .find(|&y| foc_value(problem, mu, y) >= -1e-12)
            // With ∫u dμ < 0 everywhere the receiver is pinned at the lowest action.
            .map_or_else(|| Ok(problem.actions().min()), Ok),
        TieBreak::StrictFoc => {
            let (lo, hi) = problem.action_range();
            let f = |y: f64| foc_value(problem, mu, y);
            let (flo, fhi) = (f(lo), f(hi));
            if flo < -ROOT_TOL {
                return Err(Error::NoRoot(format!("∫u dμ = {flo} < 0 at the lowest action {lo}")));
            }
            if fhi > ROOT_TOL {
                return Err(Error::NoRoot(format!("∫u dμ = {fhi} > 0 at the highest action {hi}")));
            }
            if flo <= 0.0 {
                return Ok(lo);
            }
            if fhi >= 0.0 {
                return Ok(hi);
            }
            Ok(bisect(f, lo, hi, false))
        }
    }
}

/// The state at which action `y` is exactly optimal: u(y, χ(y)) = 0.
pub fn chi(problem: &Problem, y: f64) -> Result<f64> {
    let (a, b) = (problem.states().min(), problem.states().max());
    let f = |x: f64| problem.u(y, x);
    let (fa, fb) = (f(a), f(b));
    if fa.abs() <= ROOT_TOL {
        return Ok(a);
    }
    if fb.abs() <= ROOT_TOL {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!("u({y}, ·) has constant sign on the state range")));
    }
    Ok(bisect(f, a, b, fa < 0.0))
}

/// W(μ) = ∫V(γ(μ), x) dμ.
pub fn indirect_utility(problem: &Problem, mu: &Posterior) -> Result<f64> {
    let y = gamma(problem, mu)?;
    Ok(mu.expect(problem, |x| problem.v(y, x)))
}

/// Outcome induced by a Bayes-plausible signal, with actions snapped to the grid.
pub fn signal_to_outcome(problem: &Problem, tau: &Signal) -> Result<Outcome> {
    let res = tau.bayes_residual(problem);
    if res > 1e-9 {
        return Err(Error::InvalidSignal(format!("not Bayes plausible (marginal residual {res})")));
    }
    let n = problem.n_states();
    let mut mass = vec![0.0; problem.n_actions() * n];
    for (mu, m) in tau.atoms() {
        let y = gamma(problem, mu)?;
        let j = problem.actions().snap(y)?;
        for (i, w) in mu.iter() {
            mass[j * n + i] += m * w;
        }
    }
    Outcome::from_mass(problem, mass)
}
