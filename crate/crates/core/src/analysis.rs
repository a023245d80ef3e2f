//! End-to-end runs shared by the command line, the C interface and the tests:
//! LP plus duals, every structure checker, and the results bundle for oracle checks.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lp::{
    build_lp_with_cap, contact_set, solve_dual, solve_primal_with, verify_complementary_slackness, ContactSet, CsReport,
    DualSource, Pricing, PriceSystem, SimplexOptions, DEFAULT_SIZE_CAP,
};
use crate::model::{check_assumptions, Family, Outcome, Problem};
use crate::nad::NadSolution;
use crate::presets::ResultsBundle;
use crate::structure::{
    check_full_disclosure, check_nad_condition, check_sdpd_sufficient, check_twist, classify_monotonicity, extract_chi,
    ChiPair, ClassifyOptions, FullDisclosureVerdict, MonotonicityLabel, NadVerdict, PoolingPlan, SdpdLabel, TwistVerdict,
};

/// Mass above which an action row counts as used when restricting the contact set.
pub const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub pricing: Pricing,
    /// Overrides the simplex optimality tolerance.
    pub tol_lp: Option<f64>,
    /// Contact tolerance as a multiple of the problem's payoff scale; default 1e−6.
    pub tol_contact: f64,
    pub size_cap: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { pricing: Pricing::Dantzig, tol_lp: None, tol_contact: 1e-6, size_cap: DEFAULT_SIZE_CAP }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol_lp", self.tol_lp.unwrap_or(1.0)), ("tol_contact", self.tol_contact)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ParamOutOfRange { param: name.into(), value: v.to_string(), range: "(0, ∞)".into() });
            }
        }
        Ok(())
    }
}

/// LP optimum with its certificate.
#[derive(Clone, Debug)]
pub struct Solution {
    pub objective: f64,
    pub outcome: Outcome,
    pub prices: PriceSystem,
    /// Contact set restricted to mass-carrying actions.
    pub contact: ContactSet,
    pub duality_gap: f64,
    pub iterations: usize,
    pub pricing: Pricing,
    pub contact_tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub problem: String,
    pub n_states: usize,
    pub n_actions: usize,
    pub objective: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    pub marginal_residual: f64,
    pub obedience_residual: f64,
    pub feasibility_residual: f64,
    pub dual_source: DualSource,
    pub pricing: Pricing,
    pub iterations: usize,
    pub contact_tol: f64,
    pub contact_rows: usize,
}

pub fn solve(problem: &Problem, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    let lp = build_lp_with_cap(problem, cfg.size_cap)?;
    let mut opts = SimplexOptions { pricing: cfg.pricing, ..SimplexOptions::default() };
    if let Some(t) = cfg.tol_lp {
        opts.optimality_tol = t;
    }
    let primal = solve_primal_with(&lp, &opts)?;
    let prices = solve_dual(&lp, &primal)?;
    let contact_tol = cfg.tol_contact * problem.scale();
    let contact = contact_set(problem, &prices, contact_tol).on_support(&primal.outcome, SUPPORT_TOL);
    Ok(Solution {
        objective: primal.objective,
        duality_gap: (prices.dual_objective - primal.objective).abs(),
        outcome: primal.outcome,
        prices,
        contact,
        iterations: primal.iterations,
        pricing: primal.pricing,
        contact_tol,
    })
}

impl Solution {
    pub fn summary(&self, problem: &Problem) -> Summary {
        Summary {
            problem: problem.name().to_string(),
            n_states: problem.n_states(),
            n_actions: problem.n_actions(),
            objective: self.objective,
            dual_objective: self.prices.dual_objective,
            duality_gap: self.duality_gap,
            marginal_residual: self.outcome.marginal_residual,
            obedience_residual: self.outcome.obedience_residual,
            feasibility_residual: self.prices.feasibility_residual,
            dual_source: self.prices.source,
            pricing: self.pricing,
            iterations: self.iterations,
            contact_tol: self.contact_tol,
            contact_rows: self.contact.rows.len(),
        }
    }

    pub fn complementary_slackness(&self, problem: &Problem) -> CsReport {
        verify_complementary_slackness(problem, &self.outcome, &self.prices, self.contact_tol)
    }

    /// χ1, χ2 read off the contact set, when it is strictly single-dipped.
    pub fn chi(&self, problem: &Problem) -> Result<ChiPair> {
        extract_chi(problem, &self.contact)
    }
}

/// One checker's verdict; `witness` is set when the checker found a counterexample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub checker: String,
    pub label: String,
    pub witness: Option<Value>,
    pub detail: Value,
}

fn verdict(checker: &str, label: &str, witness: Option<Value>, detail: Value) -> Verdict {
    Verdict { checker: checker.into(), label: label.into(), witness, detail }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Runs every structure checker. Checkers that need the LP read it from `solution`.
pub fn check_all(problem: &Problem, solution: &Solution) -> Vec<Verdict> {
    let mut out = Vec::new();

    let a = check_assumptions(problem);
    let first = a.violations.first().map(to_value);
    let label = if a.violations.is_empty() { "ok" } else { "violated" };
    out.push(verdict("assumptions", label, first, to_value(&a)));

    let t = check_twist(problem);
    let w = match &t {
        TwistVerdict::Fails { witness, opposite } => Some(json!({ "triple": witness, "opposite": opposite })),
        _ => None,
    };
    out.push(verdict("twist", t.label(), w, to_value(&t)));

    let s = check_sdpd_sufficient(problem);
    let w = if s.label == SdpdLabel::Neither { s.witness.as_ref().map(to_value) } else { None };
    out.push(verdict("sdpd", s.label.as_str(), w, to_value(&s)));

    let fd = check_full_disclosure(problem);
    let w = match fd.verdict {
        FullDisclosureVerdict::NotOptimal { .. } => Some(to_value(&fd.verdict)),
        _ => None,
    };
    out.push(verdict("full_disclosure", fd.verdict.label(), w, to_value(&fd)));

    let nd = check_nad_condition(problem);
    let w = match nd.verdict {
        NadVerdict::Fails { .. } => Some(to_value(&nd.verdict)),
        NadVerdict::Holds => None,
    };
    out.push(verdict("nad_condition", nd.verdict.label(), w, to_value(&nd)));

    let plan = PoolingPlan::from_contact(problem, &solution.contact);
    match classify_monotonicity(problem, &plan, &ClassifyOptions::grid()) {
        Ok(rep) => {
            let w = match rep.label {
                MonotonicityLabel::Neither => rep.witness().map(to_value),
                _ => None,
            };
            out.push(verdict("classify_lp", rep.label.as_str(), w, to_value(&rep)));
        }
        Err(e) => out.push(verdict("classify_lp", "error", None, json!({ "error": e.to_string() }))),
    }

    let split = split_states(problem, &solution.outcome);
    let structure = match solution.chi(problem) {
        Ok(_) if !split.is_empty() => verdict("nad_structure", "split_states", None, json!({ "split_states": split })),
        Ok(c) if c.negative_assortative => verdict("nad_structure", "negative_assortative", None, json!({ "pairs": c.len() })),
        Ok(c) => verdict("nad_structure", "not_negative_assortative", None, json!({ "pairs": c.len() })),
        Err(e) => verdict("nad_structure", "not_strictly_dipped", None, json!({ "reason": e.to_string() })),
    };
    out.push(structure);
    out
}

/// A state counts as split when its mass reaches actions this many action-grid cells apart.
/// Grids spread pooled states over adjacent actions, so nearby actions do not count.
pub const SPLIT_CELLS: f64 = 3.0;

/// States whose mass goes to actions more than [`SPLIT_CELLS`] cells apart.
pub fn split_states(problem: &Problem, outcome: &Outcome) -> Vec<f64> {
    let reach = SPLIT_CELLS * problem.actions().max_spacing();
    (0..problem.n_states())
        .filter(|&i| {
            let mut used = (0..problem.n_actions()).filter(|&j| outcome.mass(j, i) > SUPPORT_TOL);
            match (used.next(), used.next_back()) {
                (Some(lo), Some(hi)) => problem.action(hi) - problem.action(lo) > reach,
                _ => false,
            }
        })
        .map(|i| problem.state(i))
        .collect()
}

/// (y, lowest, highest) support state of every action row that carries mass.
pub fn support_chi(problem: &Problem, outcome: &Outcome) -> Vec<(f64, f64, f64)> {
    outcome
        .active_rows(SUPPORT_TOL)
        .into_iter()
        .filter_map(|j| {
            let sup = outcome.row_support(j, SUPPORT_TOL);
            Some((problem.action(j), problem.state(*sup.first()?), problem.state(*sup.last()?)))
        })
        .collect()
}

/// Solver outputs arranged for a preset's oracle.
pub fn results_bundle(problem: &Problem, solution: &Solution, verdicts: &[Verdict], nad: Option<&NadSolution>) -> ResultsBundle {
    let mut b = ResultsBundle {
        objective: Some(solution.objective),
        outcome: Some(solution.outcome.clone()),
        prices: Some(solution.prices.clone()),
        verdicts: verdicts.iter().map(|v| (v.checker.clone(), v.label.clone())).collect(),
        ..ResultsBundle::default()
    };
    // Under a quantile receiver only the action distribution is priced, so the LP's state pairing is not identified.
    if !matches!(problem.family(), Family::Quantile { .. }) {
        b.chi = Some(support_chi(problem, &solution.outcome));
    }
    if let Some(n) = nad {
        b.q_nodes = Some(n.q_nodes());
        b.y_low = Some(n.y_low);
        b.y_high = Some(n.y_high);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset, GridSpec, Params};

    fn built(id: &str, params: &str, n: usize) -> Problem {
        preset(id, &Params::parse(params).unwrap(), GridSpec::new(n)).unwrap().0
    }

    #[test]
    fn config_rejects_non_positive_tolerances() {
        assert!(SolveConfig::default().validate().is_ok());
        assert!(SolveConfig { tol_contact: 0.0, ..SolveConfig::default() }.validate().is_err());
        assert!(SolveConfig { tol_lp: Some(f64::NAN), ..SolveConfig::default() }.validate().is_err());
    }

    #[test]
    fn checkers_run_in_a_fixed_order() {
        let p = built("example_c1", "", 31);
        let s = solve(&p, &SolveConfig::default()).unwrap();
        let names: Vec<String> = check_all(&p, &s).into_iter().map(|v| v.checker).collect();
        assert_eq!(names, ["assumptions", "twist", "sdpd", "full_disclosure", "nad_condition", "classify_lp", "nad_structure"]);
    }

    #[test]
    fn support_chi_brackets_the_log_example() {
        let p = built("example_c1", "", 61);
        let s = solve(&p, &SolveConfig::default()).unwrap();
        assert!(split_states(&p, &s.outcome).is_empty());
        let chi = support_chi(&p, &s.outcome);
        assert!(!chi.is_empty());
        for (y, lo, hi) in chi {
            assert!(lo <= y + 1e-12 && y <= hi + 1e-12, "({y}, {lo}, {hi})");
        }
    }

    #[test]
    fn c3_with_a_heavy_left_tail_splits_states() {
        let p = built("example_c3", "f=strict", 101);
        let s = solve(&p, &SolveConfig::default()).unwrap();
        assert!(!split_states(&p, &s.outcome).is_empty());
    }

    #[test]
    fn summary_echoes_the_solution() {
        let p = built("linear", "", 21);
        let s = solve(&p, &SolveConfig::default()).unwrap();
        let sum = s.summary(&p);
        assert_eq!((sum.n_states, sum.n_actions), (21, p.n_actions()));
        assert_eq!(sum.objective, s.objective);
        assert!(sum.feasibility_residual >= -1e-9);
    }

    #[test]
    fn quantile_bundle_omits_the_pairing() {
        let p = built("quantile", "", 41);
        let s = solve(&p, &SolveConfig::default()).unwrap();
        let b = results_bundle(&p, &s, &check_all(&p, &s), None);
        assert!(b.chi.is_none());
    }
}
