use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::Arc;

use super::{Curve, GridSpec, Oracle, Params, Preset, PresetInfo};
use crate::error::{Error, Result};
use crate::model::{
    gamma, CellFilter, Density, Family, Grid, GridKind, Kernel, OrderingMode, Posterior, Problem, Signal, TieBreak,
};

pub(super) const CATALOG: &[PresetInfo] = &[
    PresetInfo {
        id: "linear",
        summary: "u = x − y with a state-independent sender V(y)",
        params: &[("shape", "square | convex | concave | identity (default concave)")],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "linear_receiver",
        summary: "u = x − y, V = a·y² + y·(c0 + c1·x + c2·x²)",
        params: &[
            ("a", "[-5, 5], default -0.25"),
            ("c0", "[-5, 5], default 1"),
            ("c1", "[-5, 5], default 1"),
            ("c2", "[-5, 5], default 0.5"),
        ],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "rayo_segal",
        summary: "separable sender V = w(x)·G(y) with a linear receiver",
        params: &[
            ("w", "increasing (1+x) | decreasing (2−x) | convex (1/(0.5+x)), default increasing"),
            ("G", "linear | convex | concave, default convex"),
        ],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "translation_sender",
        summary: "V = P(y − x) with a linear receiver",
        params: &[("P", "concave (2z − z²/2) | convex (2z + z²/2) | exp (e^z), default concave")],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "translation_receiver",
        summary: "u = T(x − y) for a sigmoid kernel T, state-independent V(y)",
        params: &[
            ("T", "tanh | logistic, default tanh"),
            ("V", "identity | convex | concave, default concave"),
            ("k", "kernel steepness in [0.5, 10], default 2"),
        ],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "quantile",
        summary: "u = 1{x ≥ y} − κ with V = y, sender-favourable ties",
        params: &[("kappa", "[0.01, 0.99], default 0.5")],
        flags: [false, false, true, true],
    },
    PresetInfo {
        id: "example_c1",
        summary: "states [1/e, e], f = 1/(2x), V = y/x, u = x − y",
        params: &[],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "example_c2",
        summary: "quantile receiver with a choice of prior",
        params: &[
            ("kappa", "[0.01, 0.99], default 0.5"),
            ("prior", "uniform | increasing (2x) | decreasing (2(1−x)), default uniform"),
        ],
        flags: [false, false, true, true],
    },
    PresetInfo {
        id: "example_c3",
        summary: "X = Y = [−1, 3], u = tanh(x − y), V = tanh(2y)",
        params: &[("f", "equal (f(−y) = 3f(3y)) | strict (f(−y) > 3f(3y)), default equal")],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "contest",
        summary: "V = y/x, u = x − (1+x²)y on [xmin, xmax]",
        params: &[
            ("xmin", "(0, 10], default 0.1"),
            ("xmax", "(xmin, 10], default 0.5"),
            ("relabel", "declare single crossing in x instead of u_x > 0, default true"),
        ],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "affiliated",
        summary: "V = G(y|x), u = (x − x0)·g(y|x) with g(t|x) ∝ exp(−θtx)",
        params: &[
            ("x0", "[0.05, 0.95], default 0.6"),
            ("theta", "[0.1, 10], default 4"),
            ("g", "exp (only option)"),
        ],
        flags: [false, false, false, true],
    },
    PresetInfo {
        id: "stress_test",
        summary: "linear receiver, pass/fail sender V = w(x)·1{y ≥ x0}, cells y < σ(x) forbidden",
        params: &[
            ("x0", "[0.05, 0.95], default 0.5"),
            ("delta", "[0, 1), default 0.2"),
            ("w", "decreasing (1.5 − x) | constant, default decreasing"),
        ],
        flags: [false, true, true, false],
    },
    PresetInfo {
        id: "gerrymander",
        summary: "districting: u = v(y,x) − 1/2 with logistic v, seat value V(y) a logistic shock CDF",
        params: &[
            ("v", "logistic (only option)"),
            ("noise", "voter noise scale in [0.02, 2], default 0.15"),
            ("shock", "shock scale in [0.02, 2], default 0.1"),
        ],
        flags: [true, true, true, true],
    },
    PresetInfo {
        id: "option_pricing",
        summary: "martingale transport: terminal price x, forward y, exotic payoff V(y,x)",
        params: &[("payoff", "power (y(2+x²) − y²/2) | root (y(2+√x) − y²/2), default power")],
        flags: [true, true, true, true],
    },
];

/// Point masses for a density on a grid: each point collects the density over
/// its two half-cells, evaluated at each half-cell's midpoint, then normalized.
pub fn density_weights(points: &[f64], f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let n = points.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (points[k + 1] - points[k]);
        w[k] += h * f(points[k] + 0.5 * h);
        w[k + 1] += h * f(points[k + 1] - 0.5 * h);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

enum ActionPlan {
    /// Degenerate-belief actions γ(δ_x), their midpoints, and the range ends.
    Degenerate,
    /// The action grid equals the state grid.
    States,
    Points(Vec<f64>),
}

struct Draft {
    name: &'static str,
    states: Grid,
    prior: Vec<f64>,
    density: Option<Density>,
    v: Kernel,
    u: Kernel,
    tie: TieBreak,
    family: Family,
    ordering: OrderingMode,
    smooth: bool,
    forbidden: Option<CellFilter>,
    range: (f64, f64),
    plan: ActionPlan,
}

impl Draft {
    fn new(name: &'static str, states: Grid, prior: Vec<f64>, v: Kernel, u: Kernel, range: (f64, f64)) -> Self {
        Draft {
            name,
            states,
            prior,
            density: None,
            v,
            u,
            tie: TieBreak::StrictFoc,
            family: Family::Generic,
            ordering: OrderingMode::Supermodular,
            smooth: true,
            forbidden: None,
            range,
            plan: ActionPlan::Degenerate,
        }
    }

    /// Uniform prior on a uniform state grid, with the matching constant density.
    fn uniform(name: &'static str, states: Grid, v: Kernel, u: Kernel, range: (f64, f64)) -> Self {
        let prior = uniform_prior(states.len());
        let width = states.range();
        let mut d = Draft::new(name, states, prior, v, u, range);
        d.density = Some(Arc::new(move |_| 1.0 / width));
        d
    }

    fn make(&self, actions: Grid) -> Result<Problem> {
        let mut b = Problem::builder(self.name, self.states.clone(), actions, self.prior.clone(), self.v.clone(), self.u.clone())
            .tie_break(self.tie)
            .family(self.family)
            .ordering(self.ordering)
            .smooth(self.smooth)
            .action_range(self.range.0, self.range.1);
        if let Some(f) = self.density.clone() {
            b = b.density(move |x| f(x));
        }
        if let Some(f) = self.forbidden.clone() {
            b = b.forbidden(move |y, x| f(y, x));
        }
        b.build()
    }

    fn finish(self, grid: GridSpec) -> Result<Problem> {
        let (lo, hi) = self.range;
        if let Some(m) = grid.actions {
            return self.make(Grid::uniform(lo, hi, m, GridKind::Action)?);
        }
        let points = match &self.plan {
            ActionPlan::States => self.states.points().to_vec(),
            ActionPlan::Points(p) => p.clone(),
            ActionPlan::Degenerate => {
                let probe = self.make(Grid::uniform(lo, hi, 2, GridKind::Action)?)?;
                let mut g: Vec<f64> = Vec::with_capacity(self.states.len());
                for i in 0..self.states.len() {
                    g.push(gamma(&probe, &Posterior::degenerate(i))?.clamp(lo, hi));
                }
                g.sort_by(f64::total_cmp);
                let mut pts = vec![lo, hi];
                pts.extend(g.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                pts.extend(g);
                pts
            }
        };
        self.make(Grid::new(dedup(points), GridKind::Action)?)
    }
}

fn dedup(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    let scale = pts.last().unwrap().abs().max(pts[0].abs()).max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|&q| p - q > 1e-12 * scale) {
            out.push(p);
        }
    }
    out
}

fn unit_states(n: usize) -> Result<Grid> {
    if n < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 states, got {n}")));
    }
    Grid::uniform(0.0, 1.0, n, GridKind::State)
}

fn uniform_prior(n: usize) -> Vec<f64> {
    density_weights(&(0..n).map(|i| i as f64).collect::<Vec<_>>(), &|_| 1.0)
}

fn linear_receiver_kernel() -> Kernel {
    Kernel::new(|y, x| x - y).dy(|_, _| -1.0).dx(|_, _| 1.0).dyx(|_, _| 0.0).dyy(|_, _| 0.0)
}

/// State-independent V(y) choices shared by several presets: (V, V', V'').
fn shape_in_y(name: &str) -> (fn(f64) -> f64, fn(f64) -> f64, fn(f64) -> f64) {
    match name {
        "square" => (|y| y * y, |y| 2.0 * y, |_| 2.0),
        "convex" => (|y| y + y * y, |y| 1.0 + 2.0 * y, |_| 2.0),
        "concave" => (|y| y - 0.25 * y * y, |y| 1.0 - 0.5 * y, |_| -0.5),
        _ => (|y| y, |_| 1.0, |_| 0.0),
    }
}

fn kernel_in_y(name: &str) -> Kernel {
    let (g, g1, g2) = shape_in_y(name);
    Kernel::new(move |y, _| g(y)).dy(move |y, _| g1(y)).dx(|_, _| 0.0).dyx(|_, _| 0.0).dyy(move |y, _| g2(y))
}

fn verdicts(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn curve(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Curve {
    Arc::new(f)
}

struct Built {
    problem: Problem,
    flags: [bool; 4],
    verdicts: BTreeMap<String, String>,
    oracle: Option<Oracle>,
}

/// Builds preset `id` on grids of the requested size.
pub fn preset(id: &str, params: &Params, grid: GridSpec) -> Result<(Problem, Preset)> {
    let info = CATALOG.iter().find(|p| p.id == id).ok_or_else(|| Error::UnknownPreset(id.to_string()))?;
    let allowed: Vec<&str> = info.params.iter().map(|p| p.0).collect();
    params.expect_only(id, &allowed)?;
    let n = grid.states;
    let b = match id {
        "linear" => linear(params, n, grid)?,
        "linear_receiver" => linear_receiver(params, n, grid)?,
        "rayo_segal" => rayo_segal(params, n, grid)?,
        "translation_sender" => translation_sender(params, n, grid)?,
        "translation_receiver" => translation_receiver(params, n, grid)?,
        "quantile" => quantile(params, n, grid, false)?,
        "example_c1" => example_c1(n, grid)?,
        "example_c2" => quantile(params, n, grid, true)?,
        "example_c3" => example_c3(params, n, grid)?,
        "contest" => contest(params, n, grid)?,
        "affiliated" => affiliated(params, n, grid)?,
        "stress_test" => stress_test(params, n, grid)?,
        "gerrymander" => gerrymander(params, n, grid)?,
        "option_pricing" => option_pricing(params, n, grid)?,
        _ => unreachable!("catalog and dispatch disagree on '{id}'"),
    };
    let meta = Preset {
        id: id.to_string(),
        summary: info.summary.to_string(),
        params: params.clone(),
        expected_flags: b.flags,
        expected_verdicts: b.verdicts,
        oracle: b.oracle,
    };
    Ok((b.problem, meta))
}

fn full_disclosure_oracle(problem: &Problem) -> Result<Oracle> {
    let signal = Signal::full_disclosure(problem);
    let mut value = 0.0;
    for (mu, m) in signal.atoms() {
        value += m * crate::model::indirect_utility(problem, mu)?;
    }
    Ok(Oracle { objective: Some(value), signal: Some(signal), tol: 1e-9, ..Oracle::default() })
}

fn linear(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let shape = params.choice("shape", "concave", &["square", "convex", "concave", "identity"])?;
    let mut d = Draft::uniform("linear", unit_states(n)?, kernel_in_y(shape), linear_receiver_kernel(), (0.0, 1.0));
    d.family = Family::LinearReceiver;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let fd = match shape {
        "square" | "convex" => "optimal_unique",
        "identity" => "optimal",
        _ => "not_optimal",
    };
    let oracle = match shape {
        "square" | "convex" => Some(full_disclosure_oracle(&problem)?),
        "concave" => {
            // No disclosure: the receiver plays the prior mean.
            let (g, _, _) = shape_in_y(shape);
            let mean: f64 = problem.states().points().iter().zip(problem.prior()).map(|(x, w)| x * w).sum();
            Some(Oracle { objective: Some(g(mean)), tol: 1e-9, ..Oracle::default() })
        }
        _ => None,
    };
    let flags = [true, true, true, shape != "square"];
    Ok(Built { problem, flags, verdicts: verdicts(&[("twist", "fails"), ("full_disclosure", fd)]), oracle })
}

fn linear_receiver(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let a = params.f64_in("a", -0.25, -5.0, 5.0)?;
    let c0 = params.f64_in("c0", 1.0, -5.0, 5.0)?;
    let c1 = params.f64_in("c1", 1.0, -5.0, 5.0)?;
    let c2 = params.f64_in("c2", 0.5, -5.0, 5.0)?;
    let v = Kernel::new(move |y, x| a * y * y + y * (c0 + c1 * x + c2 * x * x))
        .dy(move |y, x| 2.0 * a * y + c0 + c1 * x + c2 * x * x)
        .dx(move |y, x| y * (c1 + 2.0 * c2 * x))
        .dyx(move |_, x| c1 + 2.0 * c2 * x)
        .dyy(move |_, _| 2.0 * a);
    let mut d = Draft::uniform("linear_receiver", unit_states(n)?, v, linear_receiver_kernel(), (0.0, 1.0));
    d.family = Family::LinearReceiver;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let min_vy = [0.0, 1.0]
        .iter()
        .flat_map(|&y| [0.0, 1.0, -c1 / (2.0 * c2)].map(move |x: f64| (y, x)))
        .filter(|&(_, x)| (0.0..=1.0).contains(&x))
        .map(|(y, x)| 2.0 * a * y + c0 + c1 * x + c2 * x * x)
        .fold(f64::INFINITY, f64::min);
    let mut v = vec![];
    if c2 > 0.0 {
        v.push(("sdpd", "dipped_strict"));
    } else if c2 < 0.0 {
        v.push(("sdpd", "peaked_strict"));
    }
    Ok(Built { problem, flags: [true, true, true, min_vy > 0.0], verdicts: verdicts(&v), oracle: None })
}

fn rayo_segal(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let w_name = params.choice("w", "increasing", &["increasing", "decreasing", "convex"])?;
    let g_name = params.choice("G", "convex", &["linear", "convex", "concave"])?;
    let (w, w1): (fn(f64) -> f64, fn(f64) -> f64) = match w_name {
        "increasing" => (|x| 1.0 + x, |_| 1.0),
        "decreasing" => (|x| 2.0 - x, |_| -1.0),
        _ => (|x| 1.0 / (0.5 + x), |x| -1.0 / ((0.5 + x) * (0.5 + x))),
    };
    let (g, g1, g2) = shape_in_y(if g_name == "linear" { "identity" } else { g_name });
    let v = Kernel::new(move |y, x| w(x) * g(y))
        .dy(move |y, x| w(x) * g1(y))
        .dx(move |y, x| w1(x) * g(y))
        .dyx(move |y, x| w1(x) * g1(y))
        .dyy(move |y, x| w(x) * g2(y));
    let mut d = Draft::uniform("rayo_segal", unit_states(n)?, v, linear_receiver_kernel(), (0.0, 1.0));
    d.family = Family::LinearReceiver;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let mut vd = vec![];
    let mut oracle = None;
    if w_name == "increasing" && g_name != "concave" {
        vd.push(("full_disclosure", if g_name == "convex" { "optimal_unique" } else { "optimal" }));
        oracle = Some(full_disclosure_oracle(&problem)?);
    }
    vd.push(("sdpd", if w_name == "convex" { "dipped_strict" } else { "neither" }));
    Ok(Built { problem, flags: [true; 4], verdicts: verdicts(&vd), oracle })
}

fn translation_sender(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let p_name = params.choice("P", "concave", &["concave", "convex", "exp"])?;
    let (p, p1, p2): (fn(f64) -> f64, fn(f64) -> f64, fn(f64) -> f64) = match p_name {
        "concave" => (|z| 2.0 * z - 0.5 * z * z, |z| 2.0 - z, |_| -1.0),
        "convex" => (|z| 2.0 * z + 0.5 * z * z, |z| 2.0 + z, |_| 1.0),
        _ => (f64::exp, f64::exp, f64::exp),
    };
    let v = Kernel::new(move |y, x| p(y - x))
        .dy(move |y, x| p1(y - x))
        .dx(move |y, x| -p1(y - x))
        .dyx(move |y, x| -p2(y - x))
        .dyy(move |y, x| p2(y - x));
    let mut d = Draft::uniform("translation_sender", unit_states(n)?, v, linear_receiver_kernel(), (0.0, 1.0));
    d.family = Family::LinearReceiver;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let vd: Vec<(&str, &str)> = match p_name {
        "concave" => vec![("nad_condition", "fails"), ("sdpd", "neither")],
        "convex" => vec![("sdpd", "neither")],
        _ => vec![("sdpd", "dipped_strict")],
    };
    Ok(Built { problem, flags: [true; 4], verdicts: verdicts(&vd), oracle: None })
}

/// Sigmoid kernels T with T(0) = 0: (T, T', T'').
fn sigmoid(name: &str, k: f64) -> (Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>) {
    if name == "tanh" {
        (
            Arc::new(move |z: f64| (k * z).tanh()),
            Arc::new(move |z: f64| {
                let t = (k * z).tanh();
                k * (1.0 - t * t)
            }),
            Arc::new(move |z: f64| {
                let t = (k * z).tanh();
                -2.0 * k * k * t * (1.0 - t * t)
            }),
        )
    } else {
        let s = move |z: f64| 1.0 / (1.0 + (-k * z).exp());
        (
            Arc::new(move |z: f64| s(z) - 0.5),
            Arc::new(move |z: f64| k * s(z) * (1.0 - s(z))),
            Arc::new(move |z: f64| k * k * s(z) * (1.0 - s(z)) * (1.0 - 2.0 * s(z))),
        )
    }
}

fn translation_kernel(name: &str, k: f64) -> Kernel {
    let (t, t1, t2) = sigmoid(name, k);
    let (t1b, t2b) = (t1.clone(), t2.clone());
    Kernel::new(move |y, x| t(x - y))
        .dy(move |y, x| -t1(x - y))
        .dx(move |y, x| t1b(x - y))
        .dyx(move |y, x| -t2(x - y))
        .dyy(move |y, x| t2b(x - y))
}

fn translation_receiver(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let t_name = params.choice("T", "tanh", &["tanh", "logistic"])?;
    let v_name = params.choice("V", "concave", &["identity", "convex", "concave"])?;
    let k = params.f64_in("k", 2.0, 0.5, 10.0)?;
    let d = Draft::uniform("translation_receiver", unit_states(n)?, kernel_in_y(v_name), translation_kernel(t_name, k), (0.0, 1.0));
    let problem = d.finish(grid)?;
    Ok(Built { problem, flags: [true; 4], verdicts: verdicts(&[("sdpd", "dipped_strict")]), oracle: None })
}

/// Prior CDF and its inverse on [0, 1] for the quantile presets.
fn unit_prior(name: &str) -> (fn(f64) -> f64, fn(f64) -> f64, fn(f64) -> f64) {
    match name {
        "increasing" => (|x| 2.0 * x, |x| x * x, f64::sqrt),
        "decreasing" => (|x| 2.0 * (1.0 - x), |x| 1.0 - (1.0 - x) * (1.0 - x), |v| 1.0 - (1.0 - v).sqrt()),
        _ => (|_| 1.0, |x| x, |v| v),
    }
}

fn quantile(params: &Params, n: usize, grid: GridSpec, with_prior: bool) -> Result<Built> {
    let kappa = params.f64_in("kappa", 0.5, 0.01, 0.99)?;
    let prior_name =
        if with_prior { params.choice("prior", "uniform", &["uniform", "increasing", "decreasing"])? } else { "uniform" };
    let (f, cdf, inv) = unit_prior(prior_name);
    let states = unit_states(n)?;
    let prior = density_weights(states.points(), &f);
    let v = Kernel::new(|y, _| y).dy(|_, _| 1.0).dx(|_, _| 0.0).dyx(|_, _| 0.0).dyy(|_, _| 0.0);
    let u = Kernel::new(move |y, x| if x >= y { 1.0 - kappa } else { -kappa })
        .dy(|_, _| 0.0)
        .dx(|_, _| 0.0)
        .dyx(|_, _| 0.0)
        .dyy(|_, _| 0.0);
    let name = if with_prior { "example_c2" } else { "quantile" };
    let mut d = Draft::new(name, states, prior, v, u, (0.0, 1.0));
    d.tie = TieBreak::SenderFavorable;
    d.family = Family::Quantile { kappa };
    d.ordering = OrderingMode::SingleCrossing;
    d.smooth = false;
    d.density = Some(Arc::new(f));
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    // κ·φ([0, χ1]) = (1 − κ)·φ([y, 1]); χ1 and the pooled upper state meet at the quantile 1 − κ.
    let y_low = inv(1.0 - kappa);
    let oracle = Oracle {
        chi1: Some(curve(move |y| inv(((1.0 - kappa) * (1.0 - cdf(y)) / kappa).clamp(0.0, 1.0)))),
        chi2: Some(curve(|y| y)),
        rho: Some(1.0 - kappa),
        alpha_upper: Some(curve(move |y| ((1.0 - cdf(y)) / kappa).min(1.0))),
        y_low: Some(y_low),
        y_high: Some(1.0),
        tol: 2.0 * problem.states().max_spacing(),
        ..Oracle::default()
    };
    Ok(Built { problem, flags: [false, false, true, true], verdicts: verdicts(&[]), oracle: Some(oracle) })
}

fn example_c1(n: usize, grid: GridSpec) -> Result<Built> {
    let n = if n.is_multiple_of(2) { n + 1 } else { n }.max(3);
    // Log-spaced states symmetric in t = ln x, so each low state has an exact partner 1/x.
    let t: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
    let mut xs: Vec<f64> = t.iter().map(|t| t.exp()).collect();
    xs[0] = 1.0 / E;
    xs[n - 1] = E;
    xs[n / 2] = 1.0;
    // f(x) dx = dt/2 is uniform in t.
    let prior = density_weights(&t, &|_| 1.0);
    let states = Grid::new(xs.clone(), GridKind::State)?;
    let mut actions: Vec<f64> = (n / 2..n).map(|k| 0.5 * (xs[k] + xs[n - 1 - k])).collect();
    actions.push(1.0 / E);
    actions.push(E);
    let v = Kernel::new(|y, x| y / x).dy(|_, x| 1.0 / x).dx(|y, x| -y / (x * x)).dyx(|_, x| -1.0 / (x * x)).dyy(|_, _| 0.0);
    let mut d = Draft::new("example_c1", states, prior.clone(), v, linear_receiver_kernel(), (1.0 / E, E));
    d.family = Family::LinearReceiver;
    d.density = Some(Arc::new(|x: f64| 1.0 / (2.0 * x)));
    d.plan = ActionPlan::Points(actions);
    let problem = d.finish(grid)?;

    let mut atoms = Vec::new();
    for k in 0..n / 2 {
        let hi = n - 1 - k;
        atoms.push((Posterior::new(vec![k, hi], vec![0.5, 0.5])?, prior[k] + prior[hi]));
    }
    atoms.push((Posterior::degenerate(n / 2), prior[n / 2]));
    let objective: f64 = xs.iter().zip(&prior).map(|(x, w)| w * 0.5 * (1.0 + 1.0 / (x * x))).sum();
    let oracle = Oracle {
        objective: Some(objective),
        objective_continuum: Some(0.5 + (2.0f64).sinh() / 4.0),
        chi1: Some(curve(|y| y - (y * y - 1.0).max(0.0).sqrt())),
        chi2: Some(curve(|y| y + (y * y - 1.0).max(0.0).sqrt())),
        q: Some(curve(|y| y)),
        p: Some(curve(|x| {
            let y = 0.5 * (x + 1.0 / x);
            y * y
        })),
        rho: Some(0.5),
        y_low: Some(1.0),
        y_high: Some(0.5 * E + 0.5 / E),
        signal: Some(Signal::new(atoms)?),
        tol: 1e-2,
        ..Oracle::default()
    };
    let vd = verdicts(&[
        ("sdpd", "dipped_strict"),
        ("nad_condition", "holds"),
        ("full_disclosure", "not_optimal"),
        ("classify_lp", "strictly_single_dipped"),
    ]);
    Ok(Built { problem, flags: [true; 4], verdicts: vd, oracle: Some(oracle) })
}

/// Closed-form prices for the tanh example: p on states, q on actions.
pub(crate) fn c3_prices() -> (Curve, Curve) {
    let t = |z: f64| z.tanh();
    let t1 = |z: f64| 1.0 - z.tanh().powi(2);
    let p = curve(move |x| if x < 0.0 { t(2.0 * x) } else { 3.0 * t(2.0 * x / 3.0) });
    let q = curve(move |y| if y < 0.0 { 2.0 * t1(2.0 * y) / t1(0.0) } else { 2.0 });
    (p, q)
}

fn example_c3(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let f_name = params.choice("f", "equal", &["equal", "strict"])?;
    let (f_neg, f_pos) = if f_name == "equal" { (0.5, 1.0 / 6.0) } else { (0.7, 0.1) };
    // K cells on [−1, 0] and K on [0, 3], so −y and 3y are both grid states for y = k/K.
    let k_cells = ((n.max(5) - 1) / 2).max(2);
    let kf = k_cells as f64;
    let mut xs: Vec<f64> = (0..k_cells).map(|k| -1.0 + k as f64 / kf).collect();
    xs.extend((0..=k_cells).map(|k| 3.0 * k as f64 / kf));
    let density = move |x: f64| if x < 0.0 { f_neg } else { f_pos };
    let prior = density_weights(&xs, &density);
    let states = Grid::new(xs.clone(), GridKind::State)?;
    let mut actions = xs.clone();
    actions.extend((0..=k_cells).map(|k| k as f64 / kf));
    let v = Kernel::new(|y, _| (2.0 * y).tanh())
        .dy(|y, _| 2.0 * (1.0 - (2.0 * y).tanh().powi(2)))
        .dx(|_, _| 0.0)
        .dyx(|_, _| 0.0)
        .dyy(|y, _| {
            let t = (2.0 * y).tanh();
            -8.0 * t * (1.0 - t * t)
        });
    let mut d = Draft::new("example_c3", states, prior.clone(), v, translation_kernel("tanh", 1.0), (-1.0, 3.0));
    d.density = Some(Arc::new(density));
    d.plan = ActionPlan::Points(dedup(actions));
    let problem = d.finish(grid)?;

    // Pair −k/K with 3k/K at action k/K; leftover mass on −k/K is disclosed.
    let zero = k_cells;
    let mut atoms = vec![(Posterior::degenerate(zero), prior[zero])];
    for k in 1..=k_cells {
        let (lo, hi) = (zero - k, zero + k);
        let pair = 2.0 * prior[lo].min(prior[hi]);
        atoms.push((Posterior::new(vec![lo, hi], vec![0.5, 0.5])?, pair));
        let rest = prior[lo] - 0.5 * pair;
        if rest > 1e-15 {
            atoms.push((Posterior::degenerate(lo), rest));
        }
    }
    let signal = Signal::new(atoms)?;
    let mut objective = 0.0;
    for (mu, m) in signal.atoms() {
        objective += m * crate::model::indirect_utility(&problem, mu)?;
    }
    let (p, q) = c3_prices();
    let oracle = Oracle {
        objective: Some(objective),
        chi1: Some(curve(|y| if y < 0.0 { y } else { -y })),
        chi2: Some(curve(|y| if y < 0.0 { y } else { 3.0 * y })),
        p: Some(p),
        q: Some(q),
        rho: Some(0.5),
        y_low: Some(0.0),
        y_high: Some(1.0),
        signal: Some(signal),
        tol: 1e-2,
        ..Oracle::default()
    };
    let structure = if f_name == "equal" { "negative_assortative" } else { "split_states" };
    let vd = verdicts(&[("nad_condition", "fails"), ("nad_structure", structure), ("classify_lp", "strictly_single_dipped")]);
    Ok(Built { problem, flags: [true; 4], verdicts: vd, oracle: Some(oracle) })
}

fn contest(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let xmin = params.f64_in("xmin", 0.1, 1e-3, 10.0)?;
    let xmax = params.f64_in("xmax", 0.5, xmin + 1e-6, 10.0)?;
    let relabel = params.flag("relabel", true)?;
    let g = |x: f64| x / (1.0 + x * x);
    let states = Grid::uniform(xmin, xmax, n.max(3), GridKind::State)?;
    let (glo, ghi) = states.points().iter().map(|&x| g(x)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(ghi - glo > 1e-9) {
        return Err(Error::ParamOutOfRange {
            param: "xmax".into(),
            value: xmax.to_string(),
            range: "a state range on which x/(1+x²) is not constant".into(),
        });
    }
    let v = Kernel::new(|y, x| y / x).dy(|_, x| 1.0 / x).dx(|y, x| -y / (x * x)).dyx(|_, x| -1.0 / (x * x)).dyy(|_, _| 0.0);
    let u = Kernel::new(|y, x| x - (1.0 + x * x) * y)
        .dy(|_, x| -(1.0 + x * x))
        .dx(|y, x| 1.0 - 2.0 * x * y)
        .dyx(|_, x| -2.0 * x)
        .dyy(|_, _| 0.0);
    let mut d = Draft::uniform("contest", states, v, u, (glo, ghi));
    if relabel {
        d.ordering = OrderingMode::SingleCrossing;
    }
    let problem = d.finish(grid)?;
    let third = 1.0 / 3f64.sqrt();
    let mut vd = vec![];
    let mut oracle = None;
    if xmin >= 1.0 {
        vd.push(("full_disclosure", "optimal_unique"));
        oracle = Some(full_disclosure_oracle(&problem)?);
    } else if xmax <= third {
        vd.extend([("twist", "holds_positive"), ("classify_lp", "strictly_single_dipped")]);
    } else if xmin >= third && xmax <= 1.0 {
        vd.extend([("twist", "holds_negative"), ("classify_lp", "strictly_single_peaked")]);
    }
    let ordering = relabel && (xmax <= 1.0 || xmin >= 1.0) || xmax * ghi * 2.0 < 1.0;
    Ok(Built { problem, flags: [true, true, true, ordering], verdicts: verdicts(&vd), oracle })
}

/// g(t|x) ∝ exp(−a t) on [0, 1] with a = θx, and its CDF.
fn exp_density(a: f64, t: f64) -> f64 {
    if a.abs() < 1e-9 {
        1.0
    } else {
        -a * (-a * t).exp() / (-a).exp_m1()
    }
}

fn exp_cdf(a: f64, t: f64) -> f64 {
    if a.abs() < 1e-9 {
        t
    } else {
        (-a * t).exp_m1() / (-a).exp_m1()
    }
}

fn affiliated(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let x0 = params.f64_in("x0", 0.6, 0.05, 0.95)?;
    let theta = params.f64_in("theta", 4.0, 0.1, 10.0)?;
    params.choice("g", "exp", &["exp"])?;
    let v = Kernel::new(move |y, x| exp_cdf(theta * x, y))
        .dy(move |y, x| exp_density(theta * x, y))
        .dyy(move |y, x| -theta * x * exp_density(theta * x, y));
    let u = Kernel::new(move |y, x| (x - x0) * exp_density(theta * x, y))
        .dy(move |y, x| -(x - x0) * theta * x * exp_density(theta * x, y));
    let mut d = Draft::uniform("affiliated", unit_states(n)?, v, u, (0.0, 1.0));
    d.tie = TieBreak::SenderFavorable;
    d.ordering = OrderingMode::SingleCrossing;
    d.smooth = false;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let on_grid = problem.states().find(x0, 1e-12).is_some();
    Ok(Built {
        problem,
        flags: [false, !on_grid, false, true],
        verdicts: verdicts(&[("classify_lp", "single_peaked")]),
        oracle: None,
    })
}

fn stress_test(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let x0 = params.f64_in("x0", 0.5, 0.05, 0.95)?;
    let delta = params.f64_in("delta", 0.2, 0.0, 0.999)?;
    let w_name = params.choice("w", "decreasing", &["decreasing", "constant"])?;
    let w: fn(f64) -> f64 = if w_name == "decreasing" { |x| 1.5 - x } else { |_| 1.0 };
    let sigma = move |x: f64| if x <= x0 { x } else { x - delta * (x - x0) };
    let v = Kernel::new(move |y, x| if y >= x0 { w(x) } else { 0.0 }).dy(|_, _| 0.0).dyx(|_, _| 0.0).dyy(|_, _| 0.0);
    let mut d = Draft::uniform("stress_test", unit_states(n)?, v, linear_receiver_kernel(), (0.0, 1.0));
    d.tie = TieBreak::SenderFavorable;
    d.family = Family::LinearReceiver;
    d.smooth = false;
    d.forbidden = Some(Arc::new(move |y, x| y < sigma(x) - 1e-12));
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    Ok(Built {
        problem,
        flags: [false, true, true, false],
        verdicts: verdicts(&[("classify_lp", "single_dipped")]),
        oracle: None,
    })
}

fn gerrymander(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    params.choice("v", "logistic", &["logistic"])?;
    let noise = params.f64_in("noise", 0.15, 0.02, 2.0)?;
    let shock = params.f64_in("shock", 0.1, 0.02, 2.0)?;
    let s = move |z: f64| 1.0 / (1.0 + (-z / shock).exp());
    let v = Kernel::new(move |y, _| s(y - 0.5))
        .dy(move |y, _| s(y - 0.5) * (1.0 - s(y - 0.5)) / shock)
        .dx(|_, _| 0.0)
        .dyx(|_, _| 0.0)
        .dyy(move |y, _| {
            let a = s(y - 0.5);
            a * (1.0 - a) * (1.0 - 2.0 * a) / (shock * shock)
        });
    let d = Draft::uniform("gerrymander", unit_states(n)?, v, translation_kernel("logistic", 1.0 / noise), (0.0, 1.0));
    let problem = d.finish(grid)?;
    Ok(Built {
        problem,
        flags: [true; 4],
        verdicts: verdicts(&[("sdpd", "dipped_strict"), ("classify_lp", "strictly_single_dipped")]),
        oracle: None,
    })
}

fn option_pricing(params: &Params, n: usize, grid: GridSpec) -> Result<Built> {
    let payoff = params.choice("payoff", "power", &["power", "root"])?;
    let (h, h1): (fn(f64) -> f64, fn(f64) -> f64) =
        if payoff == "power" { (|x| 2.0 + x * x, |x| 2.0 * x) } else { (|x| 2.0 + x.sqrt(), |x| 0.5 / x.sqrt()) };
    let v = Kernel::new(move |y, x| y * h(x) - 0.5 * y * y)
        .dy(move |y, x| h(x) - y)
        .dx(move |y, x| y * h1(x))
        .dyx(move |_, x| h1(x))
        .dyy(|_, _| -1.0);
    let mut d = Draft::uniform("option_pricing", Grid::uniform(0.5, 1.5, n.max(3), GridKind::State)?, v, linear_receiver_kernel(), (0.5, 1.5));
    d.family = Family::LinearReceiver;
    d.plan = ActionPlan::States;
    let problem = d.finish(grid)?;
    let vd = if payoff == "power" {
        verdicts(&[("sdpd", "dipped_strict"), ("classify_lp", "strictly_single_dipped")])
    } else {
        verdicts(&[("sdpd", "peaked_strict"), ("classify_lp", "strictly_single_peaked")])
    };
    Ok(Built { problem, flags: [true; 4], verdicts: vd, oracle: None })
}
