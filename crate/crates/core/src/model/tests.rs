use super::*;
use crate::error::Error;

fn unit(n: usize, kind: GridKind) -> Grid {
    Grid::uniform(0.0, 1.0, n, kind).unwrap()
}

fn uniform_prior(n: usize) -> Vec<f64> {
    let w = vec![1.0 / n as f64; n];
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

fn linear(n: usize, v: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Problem {
    Problem::builder("linear", unit(n, GridKind::State), unit(n, GridKind::Action), uniform_prior(n), Kernel::new(v), Kernel::new(|y, x| x - y))
        .family(Family::LinearReceiver)
        .build()
        .unwrap()
}

fn contest(lo: f64, hi: f64, n: usize) -> Problem {
    let s = Grid::uniform(lo, hi, n, GridKind::State).unwrap();
    let g = |x: f64| x / (1.0 + x * x);
    let a0 = s.points().iter().map(|&x| g(x)).fold(f64::INFINITY, f64::min);
    let a1 = s.points().iter().map(|&x| g(x)).fold(f64::NEG_INFINITY, f64::max);
    let a = Grid::uniform(a0, a1, n, GridKind::Action).unwrap();
    Problem::builder("contest", s, a, uniform_prior(n), Kernel::new(|y, x| y / x), Kernel::new(|y, x| x - (1.0 + x * x) * y))
        .build()
        .unwrap()
}

fn quantile(kappa: f64, n: usize) -> Problem {
    Problem::builder(
        "quantile",
        unit(n, GridKind::State),
        unit(n, GridKind::Action),
        uniform_prior(n),
        Kernel::new(|y, _| y),
        Kernel::new(move |y, x| if x >= y { 1.0 - kappa } else { -kappa }).dy(|_, _| 0.0).dx(|_, _| 0.0),
    )
    .tie_break(TieBreak::SenderFavorable)
    .family(Family::Quantile { kappa })
    .ordering(OrderingMode::SingleCrossing)
    .smooth(false)
    .build()
    .unwrap()
}

fn idx(p: &Problem, x: f64) -> usize {
    p.states().find(x, 1e-12).unwrap()
}

#[test]
fn gamma_is_posterior_mean_for_linear_receiver() {
    let p = linear(11, |y, _| y);
    let mu = Posterior::new(vec![idx(&p, 0.2), idx(&p, 0.8)], vec![0.5, 0.5]).unwrap();
    let y = gamma(&p, &mu).unwrap();
    assert!((y - 0.5).abs() < 1e-10);
    assert!(foc_value(&p, &mu, y).abs() <= 1e-10);
}

#[test]
fn gamma_contest_degenerate() {
    let p = contest(0.1, 0.5, 5);
    let mu = Posterior::degenerate(p.states().find(0.5, 1e-12).unwrap());
    assert!((gamma(&p, &mu).unwrap() - 0.4).abs() < 1e-10);
}

#[test]
fn gamma_quantile_breaks_ties_upward() {
    let p = quantile(0.5, 101);
    let mu = Posterior::new(vec![idx(&p, 0.3), idx(&p, 0.7)], vec![0.5, 0.5]).unwrap();
    assert_eq!(gamma(&p, &mu).unwrap(), 0.7);
    let mu = Posterior::new(vec![idx(&p, 0.3), idx(&p, 0.7)], vec![0.6, 0.4]).unwrap();
    assert_eq!(gamma(&p, &mu).unwrap(), 0.3);
}

#[test]
fn gamma_no_root_outside_range() {
    // Action range [0, 0.5] cannot rationalize a belief concentrated on x = 1.
    let p = Problem::builder(
        "short",
        unit(3, GridKind::State),
        Grid::uniform(0.0, 0.5, 3, GridKind::Action).unwrap(),
        vec![0.25, 0.5, 0.25],
        Kernel::new(|y, _| y),
        Kernel::new(|y, x| x - y),
    )
    .build()
    .unwrap();
    assert!(matches!(gamma(&p, &Posterior::degenerate(2)), Err(Error::NoRoot(_))));
}

#[test]
fn chi_examples() {
    let p = linear(11, |y, _| y);
    assert!((chi(&p, 0.37).unwrap() - 0.37).abs() < 1e-10);
    let c = contest(0.1, 1.0, 11);
    let x = chi(&c, 0.4).unwrap();
    assert!((x - 0.5).abs() < 1e-9);
    assert!(c.u(0.4, x).abs() <= 1e-10);
    let q = quantile(0.5, 101);
    assert!((chi(&q, 0.6).unwrap() - 0.6).abs() < 1e-9);
}

#[test]
fn gamma_and_chi_are_inverse_on_grid() {
    let c = contest(0.1, 0.5, 21);
    for i in 0..21 {
        let y = gamma(&c, &Posterior::degenerate(i)).unwrap();
        assert!((chi(&c, y).unwrap() - c.state(i)).abs() < 2e-10);
    }
}

#[test]
fn indirect_utility_examples() {
    let p = linear(2, |y, _| y);
    let mu = Posterior::new(vec![0, 1], vec![0.5, 0.5]).unwrap();
    assert!((indirect_utility(&p, &mu).unwrap() - 0.5).abs() < 1e-10);

    let e = std::f64::consts::E;
    let s = Grid::new(vec![1.0 / e, 1.0, e], GridKind::State).unwrap();
    let a = Grid::new(vec![1.0 / e, 1.0, e], GridKind::Action).unwrap();
    let c1 = Problem::builder("c1", s, a, vec![0.25, 0.5, 0.25], Kernel::new(|y, x| y / x), Kernel::new(|y, x| x - y))
        .build()
        .unwrap();
    let mu = Posterior::new(vec![0, 2], vec![0.5, 0.5]).unwrap();
    let w = indirect_utility(&c1, &mu).unwrap();
    let y = 0.5 / e + 0.5 * e;
    assert!((w - 0.5 * y * (e + 1.0 / e)).abs() < 1e-9);
    assert!((w - 2.381_097_845).abs() < 1e-6);
    let d = indirect_utility(&c1, &Posterior::degenerate(1)).unwrap();
    assert!((d - 1.0).abs() < 1e-9);
}

#[test]
fn outcomes_of_canonical_signals() {
    let p = linear(3, |y, _| y * y);
    let fd = signal_to_outcome(&p, &Signal::full_disclosure(&p)).unwrap();
    for j in 0..3 {
        for i in 0..3 {
            let want = if i == j { p.prior()[i] } else { 0.0 };
            assert!((fd.mass(j, i) - want).abs() < 1e-15);
        }
    }
    let nd = signal_to_outcome(&p, &Signal::no_disclosure(&p).unwrap()).unwrap();
    assert_eq!(nd.active_rows(0.0), vec![1]);
    assert!(nd.obedience_residual < 1e-12 && nd.marginal_residual < 1e-15);
}

#[test]
fn signal_to_outcome_rejects_implausible() {
    let p = linear(3, |y, _| y);
    let tau = Signal::new(vec![(Posterior::degenerate(0), 1.0)]).unwrap();
    assert!(matches!(signal_to_outcome(&p, &tau), Err(Error::InvalidSignal(_))));
}

#[test]
fn assumption_flags() {
    let r = check_assumptions(&linear(21, |y, _| y));
    assert_eq!(r.flags(), [true; 4]);

    // Without the single-crossing relaxation u_x = 1 − 2xy turns negative at the top corner.
    let c = contest(0.5, 3.0, 21);
    let r = check_assumptions(&c);
    assert!(!r.ordering_ok);
    let w = r.violations.iter().find(|v| v.assumption == AssumptionId::A4).unwrap();
    assert!(1.0 - 2.0 * w.points[0] * w.points[1] <= 0.0);

    let r = check_assumptions(&quantile(0.5, 51));
    assert!(!r.smooth_ok);
    assert!(r.ordering_ok && r.interior_ok);
    assert_eq!(r.asc_ok, !r.violations.iter().any(|v| v.assumption == AssumptionId::A2));
}

#[test]
fn asc_violation_detected() {
    // u increasing in y at its zero.
    let p = Problem::builder("bad", unit(5, GridKind::State), unit(5, GridKind::Action), uniform_prior(5), Kernel::new(|y, _| y), Kernel::new(|y, x| y - x))
        .build()
        .unwrap();
    let r = check_assumptions(&p);
    assert!(!r.asc_ok);
    assert!(r.violations.iter().any(|v| v.assumption == AssumptionId::A2));
}
