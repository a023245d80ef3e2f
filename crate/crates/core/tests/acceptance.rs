//! Ten acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.
//!
//! Criterion 1 runs alone so its per-preset timings are single-job wall times;
//! the rest run on parallel threads.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use persuasion_core::analysis::{solve, SolveConfig, Solution};
use persuasion_core::lp::Pricing;
use persuasion_core::model::{gamma, signal_to_outcome, Posterior, Problem, Signal};
use persuasion_core::nad::solve_nad;
use persuasion_core::presets::{catalog, preset, GridSpec, Params};
use persuasion_core::structure::{
    check_full_disclosure, classify_monotonicity, decide_alternative, extract_chi, pairwise_split, twist_determinant,
    ClassifyOptions, FarkasVerdict, MonotonicityLabel, PoolingPlan,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn built(id: &str, params: &str, n: usize) -> Problem {
    preset(id, &Params::parse(params).unwrap(), GridSpec::new(n)).unwrap().0
}

fn lp(p: &Problem) -> Solution {
    solve(p, &SolveConfig::default()).unwrap()
}

fn lp_with(p: &Problem, cfg: SolveConfig) -> Solution {
    solve(p, &cfg).unwrap()
}

fn classify(p: &Problem, s: &Solution) -> MonotonicityLabel {
    classify_monotonicity(p, &PoolingPlan::from_contact(p, &s.contact), &ClassifyOptions::grid()).unwrap().label
}

// 1. |primal − dual| ≤ 1e−8·(1 + |primal|) on every preset at 101 points, each within 30 s.
fn strong_duality() -> Verdict {
    let mut worst = (0.0f64, String::new());
    let mut slowest = (Duration::ZERO, String::new());
    let mut failures = Vec::new();
    for info in catalog() {
        let p = built(info.id, "", 101);
        let t = Instant::now();
        let s = lp(&p);
        let dt = t.elapsed();
        let rel = s.duality_gap / (1.0 + s.objective.abs());
        if rel > 1e-8 || dt > Duration::from_secs(30) {
            failures.push(format!("{} gap {rel:.2e} time {dt:.1?}", info.id));
        }
        if rel >= worst.0 {
            worst = (rel, info.id.to_string());
        }
        if dt >= slowest.0 {
            slowest = (dt, info.id.to_string());
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} presets; max gap/(1+|primal|) {:.1e} ({}); slowest {:.2?} ({}){}",
            catalog().len(),
            worst.0,
            worst.1,
            slowest.0,
            slowest.1,
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn chi_c1(y: f64) -> (f64, f64) {
    let r = (y * y - 1.0).max(0.0).sqrt();
    (y - r, y + r)
}

// 2. example_c1 at 201 points: two-state contact rows on χ1, χ2, q ≈ y, and the NAD shooting solution.
fn example_c1() -> Verdict {
    let p = built("example_c1", "", 201);
    let s = lp_with(&p, SolveConfig { tol_contact: 1e-10, ..SolveConfig::default() });
    let h = p.states().max_spacing();
    let mut bad_rows = 0;
    let (mut chi_dev, mut q_dev) = (0.0f64, 0.0f64);
    for row in &s.contact.rows {
        let y = p.action(row.action);
        let (c1, c2) = chi_c1(y);
        let xs: Vec<f64> = row.states.iter().map(|&i| p.state(i)).collect();
        // Where χ1 and χ2 are within a cell of each other the pair collapses onto one grid state.
        let shape_ok = xs.len() == 2 || (xs.len() == 1 && c2 - c1 <= 2.0 * h);
        if !shape_ok {
            bad_rows += 1;
            continue;
        }
        let (lo, hi) = (xs[0], *xs.last().unwrap());
        chi_dev = chi_dev.max((lo - c1).abs()).max((hi - c2).abs());
        q_dev = q_dev.max((s.prices.q[row.action] - y).abs());
    }
    let lp_ok = bad_rows == 0 && chi_dev <= 2.0 * h && q_dev <= 1e-2;

    let f = p.density().unwrap().clone();
    let nad = solve_nad(&p, &|x| f(x)).unwrap();
    let (mut nad_chi, mut nad_q) = (0.0f64, 0.0f64);
    for n in &nad.nodes {
        let (c1, c2) = chi_c1(n.y);
        nad_chi = nad_chi.max((n.chi1 - c1).abs()).max((n.chi2 - c2).abs());
        nad_q = nad_q.max((n.q.unwrap() - n.y).abs());
    }
    let e = std::f64::consts::E;
    let y_low_dev = (nad.y_low - 1.0).abs();
    let y_high_dev = (nad.y_high - (e / 2.0 + 1.0 / (2.0 * e))).abs();
    let nad_ok = nad_chi <= 1e-4 && nad_q <= 1e-4 && y_low_dev <= 1e-5 && y_high_dev <= 1e-5;
    verdict(
        lp_ok && nad_ok,
        format!(
            "LP: {} contact rows, {bad_rows} malformed, χ dev {chi_dev:.2e} (≤ {:.2e}), q dev {q_dev:.1e} (≤ 1e-2); \
             NAD: χ dev {nad_chi:.1e}, q dev {nad_q:.1e} (≤ 1e-4), y̲ dev {y_low_dev:.1e}, ȳ dev {y_high_dev:.1e} (≤ 1e-5)",
            s.contact.rows.len(),
            2.0 * h
        ),
    )
}

// 3. Quantile receiver, κ = ½, uniform prior: α([y, 1]) = 2(1 − y) above y̲ = ½.
fn quantile() -> Verdict {
    let p = built("quantile", "kappa=0.5", 201);
    let s = lp(&p);
    let h = p.states().max_spacing();
    let mut tail = 0.0;
    let mut dev = 0.0f64;
    for j in (0..p.n_actions()).rev() {
        tail += s.outcome.row_mass(j);
        let y = p.action(j);
        if y >= 0.5 {
            dev = dev.max((tail - 2.0 * (1.0 - y)).abs());
        }
    }
    let lowest = s.outcome.active_rows(1e-9).first().map(|&j| p.action(j)).unwrap();
    let cell = p.actions().max_spacing();
    let ok = dev <= 2.0 * h && (lowest - 0.5).abs() <= cell;
    verdict(ok, format!("α tail dev {dev:.2e} (≤ {:.2e}); lowest action {lowest} (|· − 0.5| ≤ {cell:.1e})", 2.0 * h))
}

// 4. example_c3 with T = tanh: the closed-form (p, q) is tight on (y, −y), (y, 3y) and slack elsewhere.
fn c3_p(x: f64) -> f64 {
    if x < 0.0 {
        (2.0 * x).tanh()
    } else {
        3.0 * (2.0 * x / 3.0).tanh()
    }
}

fn c3_q(y: f64) -> f64 {
    if y < 0.0 {
        2.0 / (2.0 * y).cosh().powi(2)
    } else {
        2.0
    }
}

fn example_c3() -> Verdict {
    let (p, pr) = preset("example_c3", &Params::new(), GridSpec::new(101)).unwrap();
    let slack = |y: f64, x: f64| c3_p(x) - p.v(y, x) - c3_q(y) * p.u(y, x);
    let oracle = pr.oracle.as_ref().unwrap();
    let (op, oq) = (oracle.p.as_ref().unwrap(), oracle.q.as_ref().unwrap());

    let mut tight = 0.0f64;
    let mut shipped = 0.0f64;
    for k in 0..=50 {
        let y = k as f64 / 50.0;
        tight = tight.max(slack(y, -y).abs()).max(slack(y, 3.0 * y).abs());
        shipped = shipped.max((op(-y) - c3_p(-y)).abs()).max((op(3.0 * y) - c3_p(3.0 * y)).abs()).max((oq(y) - c3_q(y)).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let on = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let (mut sampled, mut min_slack) = (0, f64::INFINITY);
    let mut argmin = (0.0, 0.0);
    while sampled < 10_000 {
        let (y, x) = (p.action(rng.gen_range(0..p.n_actions())), p.state(rng.gen_range(0..p.n_states())));
        let contact = if y < 0.0 { on(x, y) } else { on(x, -y) || on(x, 3.0 * y) };
        if contact {
            continue;
        }
        sampled += 1;
        let s = slack(y, x);
        if s < min_slack {
            min_slack = s;
            argmin = (y, x);
        }
    }
    verdict(
        tight <= 1e-9 && min_slack >= 1e-6 && shipped <= 1e-15,
        format!(
            "max |slack| on contact {tight:.1e} (≤ 1e-9); min slack on {sampled} cells {min_slack:.2e} at (y, x) = ({:.3}, {:.3}) (≥ 1e-6); shipped curves dev {shipped:.0e}",
            argmin.0, argmin.1
        ),
    )
}

// 5. Contest thresholds and the closed-form twist determinant.
fn contest() -> Verdict {
    let p = built("contest", "xmin=1.0,xmax=2.0", 101);
    let s = lp(&p);
    let target: Vec<usize> = (0..p.n_states()).map(|i| p.actions().nearest(gamma(&p, &Posterior::degenerate(i)).unwrap())).collect();
    let off = s.outcome.mass_outside(|j, i| target[i] == j);
    let fd_ok = off <= 1e-9;

    let p = built("contest", "xmax=0.5", 101);
    let s = lp(&p);
    let dipped = classify(&p, &s);
    let nad = extract_chi(&p, &s.contact).map(|c| c.negative_assortative).unwrap_or(false);

    let p = built("contest", "xmin=0.6,xmax=0.95", 101);
    let s = lp(&p);
    let peaked = classify(&p, &s);

    let p = built("contest", "xmin=0.1,xmax=2.0", 21);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut twist_dev = 0.0f64;
    for _ in 0..1000 {
        let mut x = [0.0; 3].map(|_| rng.gen_range(0.1..2.0));
        x.sort_by(f64::total_cmp);
        let y = rng.gen_range(0.0..1.0);
        let [x1, x2, x3] = x;
        let closed = (x3 - x2) * (x3 - x1) * (x2 - x1) * (1.0 - x2 * x3 - x1 * x3 - x1 * x2) / (x1 * x2 * x3);
        let got = twist_determinant(&p, y, x1, x2, x3);
        twist_dev = twist_dev.max((got - closed).abs() / closed.abs().max(1.0));
    }
    let ok = fd_ok
        && dipped == MonotonicityLabel::StrictlySingleDipped
        && nad
        && peaked == MonotonicityLabel::StrictlySinglePeaked
        && twist_dev <= 1e-10;
    verdict(
        ok,
        format!(
            "[1, 2] off-diagonal mass {off:.1e} (≤ 1e-9); x̄ = 0.5 {} with NAD χ {nad}; [0.6, 0.95] {}; twist dev {twist_dev:.1e} (≤ 1e-10, relative above 1)",
            dipped.as_str(),
            peaked.as_str()
        ),
    )
}

fn linear_receiver(a: f64, c: [f64; 3], n: usize) -> Problem {
    let params = format!("a={a},c0={},c1={},c2={}", c[0], c[1], c[2]);
    built("linear_receiver", &params, n)
}

// 6. Linear receiver, V_y strictly convex (concave) in x ⇒ strictly single-dipped (peaked) contact.
// A plan that pools no separated states is both; the count of plans with a pooled pair is reported.
fn linear_receiver_structure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = Vec::new();
    for convex in [true, false] {
        for _ in 0..20 {
            // Concavity in y large against c1 makes pooling optimal; 2a + c0 > 0 keeps V_y > 0.
            let (a, c) = if convex {
                (rng.gen_range(-2.4..-1.0), [rng.gen_range(4.9..5.0), rng.gen_range(0.0..0.5), rng.gen_range(0.3..2.0)])
            } else {
                (rng.gen_range(-1.0..-0.1), [rng.gen_range(4.5..5.0), rng.gen_range(0.1..2.0), rng.gen_range(-2.0..-0.2)])
            };
            cases.push((convex, a, c));
        }
    }
    let (mut misses, mut pooled) = (Vec::new(), [0, 0]);
    for &(convex, a, c) in &cases {
        let p = linear_receiver(a, c, 101);
        let s = lp(&p);
        let rep = classify_monotonicity(&p, &PoolingPlan::from_contact(&p, &s.contact), &ClassifyOptions::grid()).unwrap();
        let holds = if convex { rep.strictly_dipped } else { rep.strictly_peaked };
        if !(rep.strictly_dipped && rep.strictly_peaked) {
            pooled[usize::from(!convex)] += 1;
        }
        if !holds {
            misses.push(format!("a={a:.3} c={c:.3?} → {}", rep.label.as_str()));
        }
    }
    verdict(
        misses.is_empty(),
        format!(
            "20 convex ({} pooling) + 20 concave ({} pooling) instances; mismatches {}{}",
            pooled[0],
            pooled[1],
            misses.len(),
            if misses.is_empty() { String::new() } else { format!(": {}", misses.join("; ")) }
        ),
    )
}

/// Value of full disclosure with each state's action snapped to the grid, as the LP would place it.
fn full_disclosure_value(p: &Problem) -> f64 {
    (0..p.n_states())
        .map(|i| {
            let y = gamma(p, &Posterior::degenerate(i)).unwrap();
            p.prior()[i] * p.v(p.action(p.actions().nearest(y)), p.state(i))
        })
        .sum()
}

// 7. check_full_disclosure agrees with whether the LP optimum equals the full-disclosure value.
fn full_disclosure() -> Verdict {
    let mut problems: Vec<Problem> = catalog().iter().map(|i| built(i.id, "", 101)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let a = rng.gen_range(-1.0..2.0);
        let c = [rng.gen_range(2.0..4.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        problems.push(linear_receiver(a, c, 61));
    }
    let (mut optimal, mut disagree) = (0, Vec::new());
    // "Equal" allows for LP round-off only; pooling gains on these grids can be as small as 1e-8.
    for p in &problems {
        let gap = lp(p).objective - full_disclosure_value(p);
        let equal = gap <= 1e-9 * p.scale();
        let says = check_full_disclosure(p).verdict.is_optimal();
        optimal += says as usize;
        if says != equal {
            disagree.push(format!("{} gap {gap:.2e}", p.name()));
        }
    }
    verdict(
        disagree.is_empty(),
        format!("{} instances ({optimal} full-disclosure optimal); disagreements {}{}", problems.len(), disagree.len(), if disagree.is_empty() { String::new() } else { format!(": {}", disagree.join("; ")) }),
    )
}

// 8. Exactly one Farkas alternative on 10³ random 3×3 matrices, each witness checked by multiplication.
fn farkas() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut alphas, mut betas, mut bad) = (0, 0, Vec::new());
    for k in 0..1000 {
        let r = [[0.0; 3]; 3].map(|row| row.map(|_: f64| rng.gen_range(-1.0..1.0)));
        let cert = decide_alternative(r).unwrap();
        let ok = match (cert.verdict, cert.alpha, cert.beta) {
            (FarkasVerdict::AlphaExists, Some(a), None) => {
                alphas += 1;
                let ar = [0, 1, 2].map(|c| (0..3).map(|i| a[i] * r[i][c]).sum::<f64>());
                a.iter().all(|&v| v > 0.0) && ar.iter().all(|&v| v <= 1e-12)
            }
            (FarkasVerdict::BetaExists, None, Some(b)) => {
                betas += 1;
                let rb = [0, 1, 2].map(|i| (0..3).map(|c| r[i][c] * b[c]).sum::<f64>());
                b.iter().all(|&v| v >= 0.0) && rb.iter().all(|&v| v >= -1e-12) && rb.iter().cloned().fold(f64::MIN, f64::max) >= 1e-8
            }
            _ => false,
        };
        if !ok {
            bad.push(k);
        }
    }
    verdict(bad.is_empty(), format!("1000 matrices: {alphas} α, {betas} β, {} failed verification {:?}", bad.len(), &bad[..bad.len().min(5)]))
}

// 9. example_c1 under Bland and Dantzig pricing gives the same outcome and prices.
fn pivot_uniqueness() -> Verdict {
    let p = built("example_c1", "", 101);
    let bland = lp_with(&p, SolveConfig { pricing: Pricing::Bland, ..SolveConfig::default() });
    let dantzig = lp_with(&p, SolveConfig { pricing: Pricing::Dantzig, ..SolveConfig::default() });
    let mass = bland.outcome.sup_diff(&dantzig.outcome);
    let price = (0..p.n_states())
        .filter(|&i| p.prior()[i] > 0.0)
        .map(|i| (bland.prices.p[i] - dantzig.prices.p[i]).abs())
        .fold(0.0, f64::max);
    verdict(
        mass <= 1e-8 && price <= 1e-6,
        format!("sup mass diff {mass:.1e} (≤ 1e-8); max p diff {price:.1e} (≤ 1e-6); pivots {} vs {}", bland.iterations, dantzig.iterations),
    )
}

fn random_problem(rng: &mut ChaCha8Rng) -> Problem {
    match rng.gen_range(0..4) {
        0 => {
            let c = [rng.gen_range(2.5..4.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            linear_receiver(rng.gen_range(-1.0..1.0), c, 41)
        }
        1 => {
            let t = if rng.gen_bool(0.5) { "tanh" } else { "logistic" };
            built("translation_receiver", &format!("T={t},k={}", rng.gen_range(0.5..6.0)), 41)
        }
        2 => {
            let lo = rng.gen_range(0.1..1.0);
            built("contest", &format!("xmin={lo},xmax={}", lo + rng.gen_range(0.3..1.5)), 41)
        }
        _ => built("example_c1", "", 41),
    }
}

/// A posterior on 3–6 random states whose action is interior to the action grid.
fn random_posterior(p: &Problem, rng: &mut ChaCha8Rng) -> Posterior {
    loop {
        let k = rng.gen_range(3..=6);
        let mut support: Vec<usize> = rand::seq::index::sample(rng, p.n_states(), k).into_vec();
        support.sort_unstable();
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let mu = Posterior::normalized(support, weights).unwrap();
        if let Ok(y) = gamma(p, &mu) {
            if y > p.actions().min() && y < p.actions().max() {
                return mu;
            }
        }
    }
}

// 10. Pairwise splitting recombines, keeps γ, and leaves the induced outcome unchanged.
fn splitting() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut recombine, mut foc, mut outcome) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    for _ in 0..100 {
        let p = random_problem(&mut rng);
        let mu = random_posterior(&p, &mut rng);
        let y = gamma(&p, &mu).unwrap();
        let pieces = match pairwise_split(&p, &mu) {
            Ok(v) => v,
            Err(e) => {
                errors.push(format!("{}: {e}", p.name()));
                continue;
            }
        };
        let n = p.n_states();
        let mut back = vec![0.0; n];
        for (piece, w) in &pieces {
            if piece.len() > 2 {
                errors.push(format!("{}: piece with {} states", p.name(), piece.len()));
            }
            for (i, m) in piece.iter() {
                back[i] += w * m;
            }
            foc = foc.max(piece.expect(&p, |x| p.u(y, x)).abs());
        }
        for (i, m) in mu.iter() {
            back[i] -= m;
        }
        recombine = recombine.max(back.iter().fold(0.0, |a, b| a.max(b.abs())));

        // Embed μ in a Bayes-plausible signal: weight w on μ, the rest of the prior on ν.
        let w = 0.5 * mu.iter().map(|(i, m)| p.prior()[i] / m).fold(f64::INFINITY, f64::min);
        let mut rest: Vec<f64> = p.prior().to_vec();
        for (i, m) in mu.iter() {
            rest[i] -= w * m;
        }
        let nu = Posterior::from_dense(&rest).unwrap();
        let whole = Signal::new(vec![(mu.clone(), w), (nu.clone(), 1.0 - w)]).unwrap();
        let mut atoms: Vec<(Posterior, f64)> = pieces.iter().map(|(q, m)| (q.clone(), w * m)).collect();
        atoms.push((nu, 1.0 - w));
        let split = Signal::new(atoms).unwrap();
        match (signal_to_outcome(&p, &whole), signal_to_outcome(&p, &split)) {
            (Ok(a), Ok(b)) => outcome = outcome.max(a.sup_diff(&b)),
            (a, b) => errors.push(format!("{}: outcome {:?} / {:?}", p.name(), a.err(), b.err())),
        }
    }
    verdict(
        errors.is_empty() && recombine <= 1e-12 && foc <= 1e-10 && outcome <= 1e-12,
        format!(
            "100 posteriors: recombination {recombine:.1e} (≤ 1e-12), FOC {foc:.1e} (≤ 1e-10), outcome diff {outcome:.1e} (≤ 1e-12), errors {}{}",
            errors.len(),
            errors.first().map(|e| format!(" ({e})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let names = [
        "strong duality on every preset",
        "example_c1 contact, duals and NAD",
        "quantile action distribution",
        "example_c3 dual certificate",
        "contest thresholds and twist",
        "linear-receiver contact structure",
        "full-disclosure verdicts",
        "Farkas alternatives",
        "pivot-policy uniqueness",
        "pairwise splitting",
    ];
    let rest: [fn() -> Verdict; 9] =
        [example_c1, quantile, example_c3, contest, linear_receiver_structure, full_disclosure, farkas, pivot_uniqueness, splitting];

    let t0 = Instant::now();
    let first = strong_duality();
    let mut results = vec![first];
    results.extend(std::thread::scope(|s| {
        let handles: Vec<_> = rest.iter().map(|f| s.spawn(*f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| verdict(false, "panicked")))
            .collect::<Vec<_>>()
    }));

    let mut failed = 0;
    for (k, (name, v)) in names.iter().zip(&results).enumerate() {
        println!("criterion {:2} {} {name}: {}", k + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as usize;
    }
    println!("acceptance: {} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), t0.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
