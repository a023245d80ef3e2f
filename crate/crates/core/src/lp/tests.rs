use super::*;
use crate::error::Error;
use crate::model::{Posterior, Problem};
use crate::presets::{preset, GridSpec, Params};

fn built(id: &str, n: usize) -> Problem {
    preset(id, &Params::new(), GridSpec::new(n)).unwrap().0
}

fn solved(p: &Problem) -> (LpInstance, PrimalSolution, PriceSystem) {
    let lp = build_lp(p).unwrap();
    let sol = solve_primal(&lp).unwrap();
    let prices = solve_dual(&lp, &sol).unwrap();
    (lp, sol, prices)
}

#[test]
fn dimensions_count_cells_and_rows() {
    let p = built("example_c1", 11);
    let lp = build_lp(&p).unwrap();
    let d = lp.dims();
    assert_eq!(d.marginal_rows, 11);
    assert_eq!(d.dropped_cells, 0);
    assert_eq!(lp.cells().len(), p.n_states() * p.n_actions());
    assert_eq!(lp.obedience(), ObedienceKind::Equality);
}

#[test]
fn forbidden_cells_are_dropped() {
    let p = built("stress_test", 21);
    let lp = build_lp(&p).unwrap();
    assert!(lp.dims().dropped_cells > 0);
    assert_eq!(lp.cells().len() + lp.dims().dropped_cells, p.n_states() * p.n_actions());
}

#[test]
fn sender_favorable_ties_use_inequality_rows() {
    let lp = build_lp(&built("quantile", 11)).unwrap();
    assert_eq!(lp.obedience(), ObedienceKind::Inequality);
}

#[test]
fn size_cap_is_enforced() {
    let p = built("example_c1", 11);
    let cells = p.n_states() * p.n_actions();
    match build_lp_with_cap(&p, cells - 1) {
        Err(Error::SizeLimit { vars, cap }) => assert_eq!((vars, cap), (cells, cells - 1)),
        other => panic!("expected a size-limit error, got {:?}", other.map(|lp| lp.dims().clone())),
    }
    assert!(build_lp_with_cap(&p, cells).is_ok());
}

#[test]
fn explicit_dual_reaches_the_primal_value() {
    let p = built("example_c1", 15);
    let (lp, sol, _) = solved(&p);
    let (pp, _) = solve_dual_explicit(&lp).unwrap();
    let dual: f64 = pp.iter().zip(p.prior()).map(|(a, b)| a * b).sum();
    assert!((dual - sol.objective).abs() <= 1e-9 * (1.0 + sol.objective.abs()));
}

#[test]
fn support_lies_in_the_contact_set() {
    let p = built("example_c1", 41);
    let (_, sol, prices) = solved(&p);
    let cs = contact_set(&p, &prices, default_contact_tol(&p));
    for j in 0..p.n_actions() {
        for i in 0..p.n_states() {
            if sol.outcome.mass(j, i) > MASS_TOL {
                assert!(cs.contains(j, i), "({j}, {i})");
            }
        }
    }
    let on = cs.on_support(&sol.outcome, 1e-9);
    assert!(on.rows.len() <= cs.rows.len());
    assert!(on.pairs.iter().all(|&(j, i)| cs.contains(j, i)));
}

#[test]
fn pair_posterior_is_obedient() {
    let p = built("example_c1", 41);
    let j = 10;
    let y = p.action(j);
    let (lo, hi) = (0, p.n_states() - 1);
    let mu = pair_posterior(&p, j, &[lo, hi]).unwrap();
    let foc: f64 = mu.iter().map(|(i, w)| w * p.u(y, p.state(i))).sum();
    assert!(foc.abs() < 1e-12);
    // Both states on one side of the root cannot be obedient.
    assert!(pair_posterior(&p, j, &[hi - 1, hi]).is_none());
}

#[test]
fn complementary_slackness_holds_on_the_log_example() {
    let p = built("example_c1", 41);
    let (_, sol, prices) = solved(&p);
    let rep = verify_complementary_slackness(&p, &sol.outcome, &prices, default_contact_tol(&p));
    assert_eq!(rep.support_outside_contact, 0);
    assert!(rep.max_q_residual <= 1e-6, "q residual {}", rep.max_q_residual);
    assert!(rep.feasibility_residual >= -1e-9);
}

#[test]
fn foc_fit_on_a_degenerate_belief() {
    let p = built("example_c1", 21);
    let fit = foc_fit(&p, &Posterior::degenerate(5)).unwrap();
    assert!((fit.y - p.state(5)).abs() < 1e-9);
    assert!(fit.max_residual < 1e-9);
}
