use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::ContactSet;
use crate::model::{gamma, Outcome, Problem, Signal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    Outcome,
    ContactSet,
    Signal,
}

/// One pooled posterior: the action it induces and its support (state indices, sorted).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanAtom {
    pub action: f64,
    pub states: Vec<usize>,
}

/// The supports and actions of a signal, an outcome, or a contact set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoolingPlan {
    pub atoms: Vec<PlanAtom>,
    pub source: PlanSource,
}

impl PoolingPlan {
    /// One atom per outcome row with mass above `tol`, supported on cells above `tol`.
    pub fn from_outcome(problem: &Problem, outcome: &Outcome, tol: f64) -> Self {
        let atoms = outcome
            .active_rows(tol)
            .into_iter()
            .map(|j| PlanAtom { action: problem.action(j), states: outcome.row_support(j, tol) })
            .filter(|a| !a.states.is_empty())
            .collect();
        PoolingPlan { atoms, source: PlanSource::Outcome }
    }

    /// One atom per contact row on which some belief is obedient.
    pub fn from_contact(problem: &Problem, contact: &ContactSet) -> Self {
        let atoms = contact
            .obedient_rows(problem)
            .map(|row| PlanAtom { action: problem.action(row.action), states: row.states.clone() })
            .collect();
        PoolingPlan { atoms, source: PlanSource::ContactSet }
    }

    /// Atoms at their exact (off-grid) actions.
    pub fn from_signal(problem: &Problem, signal: &Signal) -> Result<Self> {
        let mut atoms = Vec::new();
        for (mu, _) in signal.atoms() {
            atoms.push(PlanAtom { action: gamma(problem, mu)?, states: mu.support().to_vec() });
        }
        Ok(PoolingPlan { atoms, source: PlanSource::Signal })
    }

    pub fn is_pairwise(&self) -> bool {
        self.atoms.iter().all(|a| a.states.len() <= 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleKind {
    /// x1, x3 pooled at y1 and x2 at a higher action y2.
    SinglePeakedTriple,
    /// x1, x3 pooled at y1 and x2 at a lower action y2.
    SingleDippedTriple,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TripleWitness {
    pub y1: f64,
    pub y2: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub kind: TripleKind,
    pub source: PlanSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityLabel {
    StrictlySingleDipped,
    StrictlySinglePeaked,
    SingleDipped,
    SinglePeaked,
    Neither,
}

impl MonotonicityLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MonotonicityLabel::StrictlySingleDipped => "strictly_single_dipped",
            MonotonicityLabel::StrictlySinglePeaked => "strictly_single_peaked",
            MonotonicityLabel::SingleDipped => "single_dipped",
            MonotonicityLabel::SinglePeaked => "single_peaked",
            MonotonicityLabel::Neither => "neither",
        }
    }
}

/// Tolerances for grid-level classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Treat each run of adjacent grid states in an atom as a single contact point.
    /// Pairwise then means at most two runs per atom, and a middle state inside one
    /// of the outer atom's runs is attributed to grid snapping.
    pub grid_runs: bool,
    /// Middle states within this many grid points of a state of the outer atom are
    /// attributed to action-grid snapping and reported separately.
    pub snap_states: usize,
    /// Actions closer than this count as equal.
    pub gamma_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { grid_runs: false, snap_states: 0, gamma_tol: 1e-12 }
    }
}

impl ClassifyOptions {
    /// Grid-resolution reading used for LP contact sets.
    pub fn grid() -> Self {
        ClassifyOptions { grid_runs: true, snap_states: 1, gamma_tol: 1e-12 }
    }
}

/// Maximal runs of consecutive indices in a sorted index list.
pub fn index_runs(states: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in states {
        match out.last_mut() {
            Some(r) if r.1 + 1 == i => r.1 = i,
            _ => out.push((i, i)),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub label: MonotonicityLabel,
    pub strictly_dipped: bool,
    pub dipped: bool,
    pub strictly_peaked: bool,
    pub peaked: bool,
    /// A triple breaking single-dippedness (kind single_peaked_triple), if any.
    pub peaked_witness: Option<TripleWitness>,
    /// A triple breaking single-peakedness (kind single_dipped_triple), if any.
    pub dipped_witness: Option<TripleWitness>,
    /// Triples skipped under the snap tolerance that would break the reported property.
    pub snap_violations: usize,
}

impl MonotonicityReport {
    pub fn witness(&self) -> Option<&TripleWitness> {
        self.peaked_witness.as_ref().or(self.dipped_witness.as_ref())
    }
}

/// Classifies a plan against the single-dipped and single-peaked definitions.
///
/// For atoms μ1 ∋ x1 < x3 and μ2 ∋ x2 with x1 < x2 < x3 (μ1 = μ2 allowed), single-dipped
/// needs γ(μ1) ≥ γ(μ2) and strictly single-dipped γ(μ1) > γ(μ2); peaked reverses the
/// inequalities. Contact-set plans must be pairwise (per state, or per run of
/// adjacent states under `grid_runs`).
pub fn classify_monotonicity(problem: &Problem, plan: &PoolingPlan, opts: &ClassifyOptions) -> Result<MonotonicityReport> {
    if plan.source == PlanSource::ContactSet {
        let width = |a: &PlanAtom| if opts.grid_runs { index_runs(&a.states).len() } else { a.states.len() };
        if let Some(a) = plan.atoms.iter().find(|a| width(a) > 2) {
            let action = problem.actions().nearest(a.action);
            return Err(Error::PairwiseRequired { action, states: a.states.len() });
        }
    }
    let tol = opts.gamma_tol;
    let mut rep = MonotonicityReport {
        label: MonotonicityLabel::Neither,
        strictly_dipped: true,
        dipped: true,
        strictly_peaked: true,
        peaked: true,
        peaked_witness: None,
        dipped_witness: None,
        snap_violations: 0,
    };
    // Scan in a fixed order so witnesses are deterministic.
    let mut atoms: Vec<&PlanAtom> = plan.atoms.iter().collect();
    atoms.sort_by(|a, b| a.action.total_cmp(&b.action).then_with(|| a.states.cmp(&b.states)));
    let (mut near_sd, mut near_sp) = (0usize, 0usize);
    for a1 in &atoms {
        let (Some(&lo), Some(&hi)) = (a1.states.first(), a1.states.last()) else { continue };
        if hi <= lo + 1 {
            continue;
        }
        // Distance from a state index to the nearest state of a1.
        let gap = |m: usize| match a1.states.binary_search(&m) {
            Ok(_) => 0,
            Err(k) => {
                let left = if k > 0 { m - a1.states[k - 1] } else { usize::MAX };
                let right = a1.states.get(k).map_or(usize::MAX, |&r| r - m);
                left.min(right)
            }
        };
        for a2 in &atoms {
            for &mid in a2.states.iter().filter(|&&s| s > lo && s < hi) {
                let d = gap(mid);
                let near = if opts.grid_runs { d <= opts.snap_states } else { d >= 1 && d <= opts.snap_states };
                let (y1, y2) = (a1.action, a2.action);
                let (sd, sp) = (y1 > y2 + tol, y1 < y2 - tol);
                if near {
                    near_sd += usize::from(!sd);
                    near_sp += usize::from(!sp);
                    continue;
                }
                // The outer states of the witness are the nearest a1 states around mid.
                let k = a1.states.partition_point(|&s| s < mid);
                let left = a1.states[..k].iter().rev().find(|&&s| s < mid).copied().unwrap_or(lo);
                let right = a1.states[k..].iter().find(|&&s| s > mid).copied().unwrap_or(hi);
                let witness = |kind| TripleWitness {
                    y1,
                    y2,
                    x1: problem.state(left),
                    x2: problem.state(mid),
                    x3: problem.state(right),
                    kind,
                    source: plan.source,
                };
                rep.strictly_dipped &= sd;
                rep.strictly_peaked &= sp;
                if y1 < y2 - tol {
                    rep.dipped = false;
                    rep.peaked_witness.get_or_insert(witness(TripleKind::SinglePeakedTriple));
                }
                if y1 > y2 + tol {
                    rep.peaked = false;
                    rep.dipped_witness.get_or_insert(witness(TripleKind::SingleDippedTriple));
                }
            }
        }
    }
    rep.label = if rep.strictly_dipped {
        MonotonicityLabel::StrictlySingleDipped
    } else if rep.strictly_peaked {
        MonotonicityLabel::StrictlySinglePeaked
    } else if rep.dipped {
        MonotonicityLabel::SingleDipped
    } else if rep.peaked {
        MonotonicityLabel::SinglePeaked
    } else {
        MonotonicityLabel::Neither
    };
    rep.snap_violations = match rep.label {
        MonotonicityLabel::StrictlySingleDipped | MonotonicityLabel::SingleDipped => near_sd,
        MonotonicityLabel::StrictlySinglePeaked | MonotonicityLabel::SinglePeaked => near_sp,
        MonotonicityLabel::Neither => near_sd.min(near_sp),
    };
    Ok(rep)
}
