use std::f64::consts::E;

use super::*;
use crate::lp::{build_lp, solve_primal};
use crate::model::{Grid, GridKind, Kernel};
use crate::presets::{density_weights, preset, GridSpec, Params};

fn built(id: &str, params: &str, n: usize) -> Problem {
    preset(id, &Params::parse(params).unwrap(), GridSpec::new(n)).unwrap().0
}

fn density_of(p: &Problem) -> impl Fn(f64) -> f64 {
    let f = p.density().expect("preset has a density").clone();
    move |x| f(x)
}

fn c1() -> (Problem, NadSolution) {
    let p = built("example_c1", "", 101);
    let s = solve_nad(&p, &density_of(&p)).unwrap();
    (p, s)
}

fn check_invariants(s: &NadSolution, xmin: f64, xmax: f64) {
    let top = s.nodes.last().unwrap();
    assert!((top.chi1 - xmin).abs() <= 1e-6 && (top.chi2 - xmax).abs() <= 1e-6);
    assert_eq!(top.y, s.y_high);
    for w in s.nodes.windows(2) {
        assert!(w[1].y > w[0].y);
        assert!(w[1].chi1 < w[0].chi1, "chi1 must fall with y");
        assert!(w[1].chi2 > w[0].chi2, "chi2 must rise with y");
    }
    for n in &s.nodes[1..] {
        assert!(n.rho > 0.0 && n.rho < 1.0);
    }
    assert!(s.terminal_residual <= 1e-6, "terminal residual {}", s.terminal_residual);
    assert!(s.foc_residual <= 1e-6, "FOC residual {}", s.foc_residual);
    assert!(s.mass_residual <= 1e-6, "mass residual {}", s.mass_residual);
}

#[test]
fn example_c1_matches_closed_form() {
    let (p, s) = c1();
    assert_eq!(s.method, NadMethod::Shooting);
    assert!((s.y_low - 1.0).abs() <= 1e-5, "y_low = {}", s.y_low);
    assert!((s.y_high - (0.5 * E + 0.5 / E)).abs() <= 1e-5, "y_high = {}", s.y_high);
    for n in &s.nodes {
        let r = (n.y * n.y - 1.0).max(0.0).sqrt();
        assert!((n.chi1 - (n.y - r)).abs() <= 1e-4, "chi1 at y = {}", n.y);
        assert!((n.chi2 - (n.y + r)).abs() <= 1e-4, "chi2 at y = {}", n.y);
        assert!((n.q.unwrap() - n.y).abs() <= 1e-4, "q at y = {}", n.y);
        assert!((n.rho - 0.5).abs() <= 1e-4 || n.chi2 - n.chi1 < 1e-5);
    }
    check_invariants(&s, p.states().min(), p.states().max());
}

#[test]
fn example_c1_objective_is_the_continuum_value() {
    let (_, s) = c1();
    // Pairs (x, 1/x) at y = (x + 1/x)/2 give E[(1 + 1/x²)/2] under the log-uniform prior.
    let want = 0.5 + (2.0f64).sinh() / 4.0;
    assert!((s.objective - want).abs() < 1e-7, "{} vs {want}", s.objective);
}

#[test]
fn interpolation_reads_the_nodes() {
    let (_, s) = c1();
    let (a, b) = s.chi_at(1.2).unwrap();
    let r = (1.44f64 - 1.0).sqrt();
    assert!((a - (1.2 - r)).abs() < 1e-4 && (b - (1.2 + r)).abs() < 1e-4);
    assert!(s.chi_at(0.9).is_none());
    // State x is pooled at action (x + 1/x)/2 on either side.
    for x in [0.5, 0.8, 1.3, 2.4] {
        assert!((s.action_for_state(x) - 0.5 * (x + 1.0 / x)).abs() < 1e-4, "x = {x}");
    }
    assert_eq!(s.action_for_state(1.0), s.y_low);
    assert_eq!(s.triples().len(), s.nodes.len());
    assert_eq!(s.q_nodes().len(), s.nodes.len());
}

/// The example_c1 kernels with a prior that is even in ln x.
fn log_symmetric(n: usize) -> Problem {
    let t: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    let mut xs: Vec<f64> = t.iter().map(|t| t.exp()).collect();
    xs[n / 2] = 1.0;
    let prior = density_weights(&t, &|t| 1.0 + t * t);
    let states = Grid::new(xs, GridKind::State).unwrap();
    let actions = Grid::uniform(1.0 / E, E, 2 * n - 1, GridKind::Action).unwrap();
    let v = Kernel::new(|y, x| y / x).dy(|_, x| 1.0 / x).dx(|y, x| -y / (x * x)).dyx(|_, x| -1.0 / (x * x)).dyy(|_, _| 0.0);
    let u = Kernel::new(|y, x| x - y).dy(|_, _| -1.0).dx(|_, _| 1.0).dyx(|_, _| 0.0).dyy(|_, _| 0.0);
    Problem::builder("log_symmetric", states, actions, prior, v, u)
        .density(|x: f64| (1.0 + x.ln().powi(2)) / x)
        .build()
        .unwrap()
}

#[test]
fn symmetric_prior_collides_at_the_midpoint() {
    let p = log_symmetric(61);
    let s = solve_nad(&p, &density_of(&p)).unwrap();
    // The midpoint of the grid in ln x is 0, i.e. x = 1 = χ(1).
    assert!((s.y_low - 1.0).abs() < 1e-6, "y_low = {}", s.y_low);
    for n in &s.nodes {
        assert!((n.chi1 * n.chi2 - 1.0).abs() < 1e-6, "mirror pairs at y = {}", n.y);
    }
    check_invariants(&s, p.states().min(), p.states().max());
}

#[test]
fn asymmetric_prior_moves_the_collision() {
    let p = log_symmetric(61);
    // More mass at high states pulls the disclosed state up.
    let f = |x: f64| (2.0 + x.ln()) / x;
    let s = solve_nad(&p, &f).unwrap();
    assert!(s.y_low > 1.0 + 1e-3, "y_low = {}", s.y_low);
    check_invariants(&s, p.states().min(), p.states().max());
}

#[test]
fn quantile_closed_form() {
    let p = built("quantile", "", 201);
    let s = solve_nad(&p, &density_of(&p)).unwrap();
    assert_eq!(s.method, NadMethod::QuantileClosedForm);
    assert!((s.y_low - 0.5).abs() < 1e-10);
    for n in &s.nodes {
        assert!((n.chi1 - (1.0 - n.y)).abs() < 1e-9, "chi1 at {}", n.y);
        assert_eq!(n.chi2, n.y);
        assert_eq!(n.rho, 0.5);
        assert!(n.q.is_none());
    }
    // α([y, 1]) is the mass of states sent to actions at or above y: [y, 1] plus [0, 1 − y].
    let m = 20_000;
    for y in [0.5, 0.6, 0.75, 0.9, 0.99] {
        let hits = (0..m).filter(|&k| s.action_for_state((k as f64 + 0.5) / m as f64) >= y - 1e-12).count();
        let alpha = hits as f64 / m as f64;
        assert!((alpha - 2.0 * (1.0 - y)).abs() < 1e-3, "α([{y}, 1]) = {alpha}");
    }
    assert!((s.objective - 0.75).abs() < 1e-9);
}

#[test]
fn quantile_with_a_skewed_prior() {
    let p = built("example_c2", "prior=increasing,kappa=0.25", 101);
    let s = solve_nad(&p, &density_of(&p)).unwrap();
    // κ F(y̲) = (1 − κ)(1 − F(y̲)) with F = x² gives y̲ = √0.75.
    assert!((s.y_low - 0.75f64.sqrt()).abs() < 1e-9);
    for n in &s.nodes {
        let want = (3.0 * (1.0 - n.y * n.y)).sqrt();
        assert!((n.chi1 - want.min(1.0)).abs() < 1e-6, "chi1 at {}", n.y);
    }
}

#[test]
fn preconditions_are_enforced() {
    let p = built("example_c3", "", 101);
    let f = density_of(&p);
    assert!(matches!(solve_nad(&p, &f), Err(Error::IllPosed(_))));
    let p = built("example_c1", "", 51);
    let negative = |x: f64| x - 1.0;
    assert!(matches!(solve_nad(&p, &negative), Err(Error::InvalidPrior(_))));
}

#[test]
fn verify_c1_against_lp() {
    let (p, s) = c1();
    let sol = solve_primal(&build_lp(&p).unwrap()).unwrap();
    let rep = verify_against_lp(&p, &s, &sol.outcome);
    assert!(rep.agrees(), "{:?}", rep.discrepancies.first());
    assert!(rep.max_state_deviation <= 2.0 * rep.spacing);
    assert!(rep.mass_sup_distance < 1e-9);
    assert!(rep.objective_gap < 1e-3);
}

#[test]
fn shifted_solution_is_flagged_with_its_action() {
    let (p, mut s) = c1();
    for n in &mut s.nodes {
        n.chi2 += 0.8;
        n.chi1 -= 0.8;
    }
    let sol = solve_primal(&build_lp(&p).unwrap()).unwrap();
    let rep = verify_against_lp(&p, &s, &sol.outcome);
    assert!(!rep.agrees());
    let d = &rep.discrepancies[0];
    assert!(d.deviation > rep.threshold);
    assert!(sol.outcome.row_mass(p.actions().nearest(d.action)) > 0.0);
}

#[test]
fn refinement_ratio_is_computed_from_gaps() {
    let mk = |n, gap, dist| NadLpReport {
        n_states: n,
        spacing: 0.0,
        objective_nad: 0.0,
        objective_lp: gap,
        objective_gap: gap,
        mass_sup_distance: dist,
        action_sup_distance: 0.0,
        max_state_deviation: 0.0,
        threshold: 0.0,
        discrepancies: vec![],
    };
    let r = compare_refinement(&mk(101, 4e-4, 0.0), &mk(201, 1e-4, 0.0));
    assert_eq!(r.objective_ratio, 4.0);
    assert_eq!(r.distance_ratio, 1.0);
    assert!(r.objective_shrinks && r.distance_shrinks);
}
