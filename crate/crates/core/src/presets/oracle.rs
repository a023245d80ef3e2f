use std::collections::BTreeMap;

use serde::Serialize;

use super::{Curve, Preset};
use crate::lp::PriceSystem;
use crate::model::{Outcome, Problem};

/// Solver outputs that an oracle can be compared with. Every field is optional;
/// only fields present on both sides are checked.
#[derive(Clone, Debug, Default)]
pub struct ResultsBundle {
    pub objective: Option<f64>,
    pub outcome: Option<Outcome>,
    pub prices: Option<PriceSystem>,
    /// (y, χ1(y), χ2(y)) triples, from the contact set or an ODE solution.
    pub chi: Option<Vec<(f64, f64, f64)>>,
    /// (y, q(y)) samples from an ODE solution.
    pub q_nodes: Option<Vec<(f64, f64)>>,
    pub y_low: Option<f64>,
    pub y_high: Option<f64>,
    /// Checker name → reported label.
    pub verdicts: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleField {
    pub field: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tol: f64,
    /// Where the largest deviation occurred, or the mismatching labels.
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub preset: String,
    pub fields: Vec<OracleField>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.fields.iter().all(|f| f.passed)
    }
    pub fn field(&self, name: &str) -> Option<&OracleField> {
        self.fields.iter().find(|f| f.field == name)
    }
}

struct Worst {
    dev: f64,
    at: f64,
}

impl Worst {
    fn new() -> Self {
        Worst { dev: 0.0, at: f64::NAN }
    }
    fn see(&mut self, at: f64, dev: f64) {
        if dev > self.dev || dev.is_nan() {
            self.dev = dev;
            self.at = at;
        }
    }
}

fn numeric(name: &str, w: Worst, tol: f64) -> OracleField {
    OracleField {
        field: name.to_string(),
        passed: w.dev <= tol,
        max_deviation: w.dev,
        tol,
        detail: if w.at.is_nan() { String::new() } else { format!("at {}", w.at) },
    }
}

fn curve_on(samples: impl Iterator<Item = (f64, f64)>, c: &Curve) -> Worst {
    let mut w = Worst::new();
    for (at, val) in samples {
        w.see(at, (val - c(at)).abs());
    }
    w
}

/// Whether a reported label meets an expected one; strict monotonicity labels imply their weak forms.
pub fn label_satisfies(got: &str, want: &str) -> bool {
    got == want
        || matches!(
            (got, want),
            ("strictly_single_dipped", "single_dipped") | ("strictly_single_peaked", "single_peaked")
        )
}

/// Compares solver outputs with a preset's closed-form answers.
pub fn oracle_check(problem: &Problem, preset: &Preset, computed: &ResultsBundle) -> OracleReport {
    let mut fields = Vec::new();
    if let Some(o) = &preset.oracle {
        let tol = o.tol;
        if let (Some(want), Some(got)) = (o.objective, computed.objective) {
            let mut w = Worst::new();
            w.see(want, (got - want).abs());
            fields.push(numeric("objective", w, tol.max(1e-9 * (1.0 + want.abs()))));
        }
        if let Some(chi) = &computed.chi {
            let restrict = |y: f64| o.y_low.is_none_or(|lo| y >= lo - 1e-12) && o.y_high.is_none_or(|hi| y <= hi + 1e-12);
            if let Some(c1) = &o.chi1 {
                let w = curve_on(chi.iter().filter(|t| restrict(t.0)).map(|t| (t.0, t.1)), c1);
                fields.push(numeric("chi1", w, tol));
            }
            if let Some(c2) = &o.chi2 {
                let w = curve_on(chi.iter().filter(|t| restrict(t.0)).map(|t| (t.0, t.2)), c2);
                fields.push(numeric("chi2", w, tol));
            }
        }
        if let Some(q) = &o.q {
            if let Some(nodes) = &computed.q_nodes {
                fields.push(numeric("q_nodes", curve_on(nodes.iter().copied(), q), tol));
            }
            if let (Some(prices), Some(out)) = (&computed.prices, &computed.outcome) {
                let rows = out.active_rows(1e-12);
                let samples = rows.iter().map(|&j| (problem.action(j), prices.q[j]));
                fields.push(numeric("q", curve_on(samples, q), tol));
            }
        }
        if let (Some(p), Some(prices)) = (&o.p, &computed.prices) {
            let samples =
                (0..problem.n_states()).filter(|&i| problem.prior()[i] > 0.0).map(|i| (problem.state(i), prices.p[i]));
            fields.push(numeric("p", curve_on(samples, p), tol));
        }
        if let (Some(alpha), Some(out)) = (&o.alpha_upper, &computed.outcome) {
            let lo = o.y_low.unwrap_or(f64::NEG_INFINITY);
            let mut tail = 0.0;
            let mut w = Worst::new();
            for j in (0..problem.n_actions()).rev() {
                tail += out.row_mass(j);
                let y = problem.action(j);
                if y >= lo {
                    w.see(y, (tail - alpha(y)).abs());
                }
            }
            fields.push(numeric("alpha_upper", w, tol));
        }
        let active = computed.outcome.as_ref().map(|out| out.active_rows(1e-9));
        let y_low = computed.y_low.or_else(|| active.as_ref().and_then(|a| a.first()).map(|&j| problem.action(j)));
        let y_high = computed.y_high.or_else(|| active.as_ref().and_then(|a| a.last()).map(|&j| problem.action(j)));
        for (name, want, got) in [("y_low", o.y_low, y_low), ("y_high", o.y_high, y_high)] {
            if let (Some(want), Some(got)) = (want, got) {
                let mut w = Worst::new();
                w.see(want, (got - want).abs());
                fields.push(numeric(name, w, tol));
            }
        }
    }
    for (checker, want) in &preset.expected_verdicts {
        if let Some(got) = computed.verdicts.get(checker) {
            let ok = label_satisfies(got, want);
            fields.push(OracleField {
                field: format!("verdict:{checker}"),
                passed: ok,
                max_deviation: if ok { 0.0 } else { 1.0 },
                tol: 0.0,
                detail: format!("expected {want}, got {got}"),
            });
        }
    }
    OracleReport { preset: preset.id.clone(), fields }
}
