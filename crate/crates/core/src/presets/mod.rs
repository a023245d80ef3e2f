//! Preset problem builders with closed-form reference answers.

mod builders;
mod oracle;
mod params;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use builders::{density_weights, preset};
pub use oracle::{oracle_check, label_satisfies, OracleField, OracleReport, ResultsBundle};
pub use params::Params;

use crate::model::Signal;

/// A real function of one variable, used for closed-form curves.
pub type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Requested grid sizes: `states` points, and optionally a uniform action grid of `actions` points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub states: usize,
    pub actions: Option<usize>,
}

impl GridSpec {
    pub fn new(states: usize) -> Self {
        GridSpec { states, actions: None }
    }
    pub fn with_actions(states: usize, actions: usize) -> Self {
        GridSpec { states, actions: Some(actions) }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(101)
    }
}

/// Closed-form answers attached to a preset.
#[derive(Clone, Default)]
pub struct Oracle {
    /// Optimal value of the grid problem, when known exactly.
    pub objective: Option<f64>,
    /// Optimal value of the continuum problem.
    pub objective_continuum: Option<f64>,
    pub chi1: Option<Curve>,
    pub chi2: Option<Curve>,
    pub q: Option<Curve>,
    pub p: Option<Curve>,
    /// Posterior weight on chi1 in each pooled pair.
    pub rho: Option<f64>,
    /// α([y, top]) of the optimal action distribution.
    pub alpha_upper: Option<Curve>,
    pub y_low: Option<f64>,
    pub y_high: Option<f64>,
    /// An optimal signal on the grid, when it has a closed form.
    pub signal: Option<Signal>,
    pub tol: f64,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("objective", &self.objective)
            .field("objective_continuum", &self.objective_continuum)
            .field("chi", &self.chi1.is_some())
            .field("q", &self.q.is_some())
            .field("p", &self.p.is_some())
            .field("rho", &self.rho)
            .field("alpha_upper", &self.alpha_upper.is_some())
            .field("y_low", &self.y_low)
            .field("y_high", &self.y_high)
            .field("tol", &self.tol)
            .finish()
    }
}

/// Metadata returned alongside a built problem.
#[derive(Clone, Debug)]
pub struct Preset {
    pub id: String,
    pub summary: String,
    pub params: Params,
    /// Documented (smooth, asc, interior, ordering) flags.
    pub expected_flags: [bool; 4],
    /// Expected label per structure checker.
    pub expected_verdicts: BTreeMap<String, String>,
    pub oracle: Option<Oracle>,
}

/// One catalog line.
#[derive(Clone, Debug, Serialize)]
pub struct PresetInfo {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    /// Documented (smooth, asc, interior, ordering) flags at default parameters.
    pub flags: [bool; 4],
}

pub fn catalog() -> Vec<PresetInfo> {
    builders::CATALOG.to_vec()
}

pub fn preset_ids() -> Vec<&'static str> {
    builders::CATALOG.iter().map(|p| p.id).collect()
}

#[cfg(test)]
mod tests;
