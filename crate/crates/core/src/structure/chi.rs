use serde::Serialize;

use super::monotone::{classify_monotonicity, ClassifyOptions, MonotonicityLabel, PoolingPlan};
use crate::error::{Error, Result};
use crate::lp::ContactSet;
use crate::model::{chi, Problem};

/// Lower and upper contact states per contact action.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiPair {
    pub actions: Vec<f64>,
    pub chi1: Vec<f64>,
    pub chi2: Vec<f64>,
    /// χ(y) at each action, where u(y, ·) has a root on the state range.
    pub chi: Vec<Option<f64>>,
    pub chi2_monotone: bool,
    /// chi1(y′) never falls strictly inside (chi1(y), chi2(y)) for y < y′.
    pub chi1_nested: bool,
    /// chi1 nonincreasing and chi2 nondecreasing.
    pub negative_assortative: bool,
    /// chi1 ≤ χ ≤ chi2 at every action, up to `bracket_tol`.
    pub brackets_chi: bool,
    pub bracket_tol: f64,
    /// States that are contact states of more than one action.
    pub split_states: Vec<f64>,
}

impl ChiPair {
    pub fn len(&self) -> usize {
        self.actions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
    /// (y, chi1, chi2) triples.
    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        (0..self.len()).map(|k| (self.actions[k], self.chi1[k], self.chi2[k])).collect()
    }
}

/// Reads χ1 and χ2 off the obedient rows of a strictly single-dipped contact set,
/// classified at grid resolution.
pub fn extract_chi(problem: &Problem, contact: &ContactSet) -> Result<ChiPair> {
    extract_chi_with(problem, contact, &ClassifyOptions::grid())
}

pub fn extract_chi_with(problem: &Problem, contact: &ContactSet, opts: &ClassifyOptions) -> Result<ChiPair> {
    let plan = PoolingPlan::from_contact(problem, contact);
    let rep = classify_monotonicity(problem, &plan, opts)?;
    if rep.label != MonotonicityLabel::StrictlySingleDipped {
        let detail = match rep.witness() {
            Some(w) => format!(
                "{}: y1 = {}, y2 = {}, states ({}, {}, {})",
                rep.label.as_str(),
                w.y1,
                w.y2,
                w.x1,
                w.x2,
                w.x3
            ),
            None => rep.label.as_str().to_string(),
        };
        return Err(Error::NotStrictlyDipped(detail));
    }
    let mut atoms = plan.atoms;
    atoms.sort_by(|a, b| a.action.total_cmp(&b.action));

    let mut out = ChiPair {
        actions: Vec::with_capacity(atoms.len()),
        chi1: Vec::with_capacity(atoms.len()),
        chi2: Vec::with_capacity(atoms.len()),
        chi: Vec::with_capacity(atoms.len()),
        chi2_monotone: true,
        chi1_nested: true,
        negative_assortative: true,
        brackets_chi: true,
        bracket_tol: problem.states().max_spacing() * 1e-9,
        split_states: Vec::new(),
    };
    let mut uses = vec![0usize; problem.n_states()];
    for a in &atoms {
        let (lo, hi) = (a.states[0], *a.states.last().unwrap_or(&a.states[0]));
        for &i in &a.states {
            uses[i] += 1;
        }
        out.actions.push(a.action);
        out.chi1.push(problem.state(lo));
        out.chi2.push(problem.state(hi));
        out.chi.push(chi(problem, a.action).ok());
    }
    out.split_states = (0..problem.n_states()).filter(|&i| uses[i] > 1).map(|i| problem.state(i)).collect();

    for k in 0..out.len() {
        if let Some(c) = out.chi[k] {
            if out.chi1[k] > c + out.bracket_tol || out.chi2[k] < c - out.bracket_tol {
                out.brackets_chi = false;
            }
        }
        if k > 0 {
            out.chi2_monotone &= out.chi2[k] >= out.chi2[k - 1];
            out.negative_assortative &= out.chi1[k] <= out.chi1[k - 1] && out.chi2[k] >= out.chi2[k - 1];
        }
        for l in k + 1..out.len() {
            if out.chi1[l] > out.chi1[k] && out.chi1[l] < out.chi2[k] {
                out.chi1_nested = false;
            }
        }
    }
    Ok(out)
}
