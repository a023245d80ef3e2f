use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{gamma, Posterior, Problem, TieBreak};

fn rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::Internal(format!("non-finite value {v} in pairwise split")))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let (n, d): (&BigInt, &BigInt) = (r.numer(), r.denom());
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

/// Splits `mu` into posteriors with at most two states that all induce γ(mu).
///
/// Each state with u(γ, x) < 0 is paired with states where u(γ, x) > 0, outermost
/// first, so the pieces are nested. Mass bookkeeping is exact in rational
/// arithmetic; the positive side's marginal utilities are rescaled by the exact
/// ratio of total negative to total positive u-mass so the peeling closes without
/// remainder. States with u(γ, x) = 0 become degenerate pieces.
pub fn pairwise_split(problem: &Problem, mu: &Posterior) -> Result<Vec<(Posterior, f64)>> {
    if mu.len() <= 2 {
        return Ok(vec![(mu.clone(), 1.0)]);
    }
    if problem.tie_break() != TieBreak::StrictFoc {
        return Err(Error::IllPosed("pairwise splitting needs first-order-condition tie-breaking".into()));
    }
    let y = gamma(problem, mu)?;
    let us: Vec<f64> = mu.iter().map(|(i, _)| problem.u(y, problem.state(i))).collect();
    let u_scale = us.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let zero = 1e-12 * u_scale.max(f64::MIN_POSITIVE);

    let mut pieces: Vec<(Vec<usize>, Vec<BigRational>)> = Vec::new();
    let mut neg: Vec<(usize, BigRational, BigRational)> = Vec::new();
    let mut pos: Vec<(usize, BigRational, BigRational)> = Vec::new();
    for ((i, w), &u) in mu.iter().zip(&us) {
        let m = rational(w)?;
        if u.abs() <= zero {
            pieces.push((vec![i], vec![m]));
            continue;
        }
        let au = rational(u.abs())?;
        let a = &m * &au;
        if u < 0.0 {
            neg.push((i, au, a));
        } else {
            pos.push((i, au, a));
        }
    }
    if neg.is_empty() != pos.is_empty() {
        return Err(Error::Internal(format!("posterior has u-mass on one side only at γ = {y}")));
    }
    if !neg.is_empty() {
        let total_neg: BigRational = neg.iter().map(|t| t.2.clone()).sum();
        let total_pos: BigRational = pos.iter().map(|t| t.2.clone()).sum();
        let c = &total_neg / &total_pos;
        for t in &mut pos {
            t.2 = &t.2 * &c;
            t.1 = &t.1 * &c;
        }
        pos.reverse();
        let (mut a, mut b) = (0usize, 0usize);
        while a < neg.len() && b < pos.len() {
            let take = if neg[a].2 < pos[b].2 { neg[a].2.clone() } else { pos[b].2.clone() };
            let mk = &take / &neg[a].1;
            let ml = &take / &pos[b].1;
            pieces.push((vec![neg[a].0, pos[b].0], vec![mk, ml]));
            neg[a].2 = &neg[a].2 - &take;
            pos[b].2 = &pos[b].2 - &take;
            if neg[a].2.is_zero() {
                a += 1;
            }
            if pos[b].2.is_zero() {
                b += 1;
            }
        }
        if neg[a.min(neg.len() - 1)..].iter().any(|t| t.2.is_positive()) || pos[b.min(pos.len() - 1)..].iter().any(|t| t.2.is_positive()) {
            return Err(Error::Internal("pairwise split left unmatched mass".into()));
        }
    }
    let mut out = Vec::with_capacity(pieces.len());
    for (support, masses) in pieces {
        let total: BigRational = masses.iter().cloned().sum();
        let weights: Vec<f64> = masses.iter().map(|m| to_f64(&(m / &total))).collect();
        out.push((Posterior::normalized(support, weights)?, to_f64(&total)));
    }
    Ok(out)
}
