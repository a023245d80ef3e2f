use serde::Serialize;

use super::NadSolution;
use crate::model::{Outcome, Problem};

/// An LP contact state farther than the threshold from both predicted states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub action: f64,
    pub state: f64,
    pub predicted: (f64, f64),
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NadLpReport {
    pub n_states: usize,
    pub spacing: f64,
    pub objective_nad: f64,
    pub objective_lp: f64,
    pub objective_gap: f64,
    /// Largest gap between the joint CDFs of the snapped NAD outcome and the LP outcome.
    pub mass_sup_distance: f64,
    /// Largest gap between the two action distributions' upper tails α([y, top]).
    pub action_sup_distance: f64,
    /// Largest distance from an LP support state to its row's nearer predicted state.
    pub max_state_deviation: f64,
    pub threshold: f64,
    pub discrepancies: Vec<Discrepancy>,
}

impl NadLpReport {
    pub fn agrees(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// How the comparison moved between a coarse and a fine grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementReport {
    pub coarse_states: usize,
    pub fine_states: usize,
    /// Coarse objective gap over fine objective gap.
    pub objective_ratio: f64,
    pub distance_ratio: f64,
    pub objective_shrinks: bool,
    pub distance_shrinks: bool,
}

/// Grid outcome obtained by sending each state's prior mass to the NAD action, snapped to the action grid.
fn snapped_outcome(problem: &Problem, nad: &NadSolution) -> Vec<f64> {
    let n = problem.n_states();
    let mut mass = vec![0.0; problem.n_actions() * n];
    for i in 0..n {
        let j = problem.actions().nearest(nad.action_for_state(problem.state(i)));
        mass[j * n + i] += problem.prior()[i];
    }
    mass
}

/// Compares a NAD solution with an LP outcome on the same problem.
pub fn verify_against_lp(problem: &Problem, nad: &NadSolution, lp: &Outcome) -> NadLpReport {
    let (n, m) = (problem.n_states(), problem.n_actions());
    let spacing = problem.states().max_spacing();
    let threshold = 10.0 * spacing;

    let snapped = snapped_outcome(problem, nad);
    let mut cum = vec![0.0; n];
    let mut sup = 0.0f64;
    for j in 0..m {
        let mut row = 0.0;
        for i in 0..n {
            row += snapped[j * n + i] - lp.mass(j, i);
            cum[i] += row;
            sup = sup.max(cum[i].abs());
        }
    }

    let mut tail = 0.0;
    let mut action_sup = 0.0f64;
    for j in (0..m).rev() {
        tail += snapped[j * n..(j + 1) * n].iter().sum::<f64>() - lp.row_mass(j);
        action_sup = action_sup.max(tail.abs());
    }

    let mut worst = 0.0f64;
    let mut discrepancies = Vec::new();
    for j in lp.active_rows(1e-9) {
        let y = problem.action(j);
        let Some(pred) = nad.chi_at(y.clamp(nad.y_low, nad.y_high)) else { continue };
        for i in lp.row_support(j, 1e-12) {
            let x = problem.state(i);
            let dev = (x - pred.0).abs().min((x - pred.1).abs());
            worst = worst.max(dev);
            if dev > threshold {
                discrepancies.push(Discrepancy { action: y, state: x, predicted: pred, deviation: dev });
            }
        }
    }

    let objective_lp = lp.objective(problem);
    NadLpReport {
        n_states: n,
        spacing,
        objective_nad: nad.objective,
        objective_lp,
        objective_gap: (nad.objective - objective_lp).abs(),
        mass_sup_distance: sup,
        action_sup_distance: action_sup,
        max_state_deviation: worst,
        threshold,
        discrepancies,
    }
}

pub fn compare_refinement(coarse: &NadLpReport, fine: &NadLpReport) -> RefinementReport {
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 1.0 };
    RefinementReport {
        coarse_states: coarse.n_states,
        fine_states: fine.n_states,
        objective_ratio: ratio(coarse.objective_gap, fine.objective_gap),
        distance_ratio: ratio(coarse.mass_sup_distance, fine.mass_sup_distance),
        objective_shrinks: fine.objective_gap < coarse.objective_gap,
        distance_shrinks: fine.mass_sup_distance <= coarse.mass_sup_distance,
    }
}
