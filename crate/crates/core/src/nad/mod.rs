//! Negative assortative disclosure: pooled pairs (χ1(y), χ2(y)) that nest
//! outward from one disclosed state, computed by shooting on the top action ȳ.
//!
//! Along the solution both contact states satisfy the envelope condition
//! V_y + q·u_y + q′·u = 0, which pins q and q′ as functions of (y, χ1, χ2).
//! Requiring the pinned q to move at the pinned rate q′, together with mass
//! balance u(y,χ1)f(χ1)χ1′ = u(y,χ2)f(χ2)χ2′, gives a closed system. It is
//! integrated with χ2 as the independent variable, since χ2 falls strictly from
//! the top state while y can turn flat at the collision.

mod dopri;
mod prior;
mod verify;

use serde::Serialize;

pub use verify::{compare_refinement, verify_against_lp, Discrepancy, NadLpReport, RefinementReport};

use crate::error::{Error, Result};
use crate::model::{bisect, chi, Family, Problem};
use crate::structure::{check_nad_condition, check_sdpd_sufficient, SdpdLabel};
use dopri::{integrate, Run, Stop, Tolerances};
use prior::PriorTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NadNode {
    pub y: f64,
    pub chi1: f64,
    pub chi2: f64,
    /// Obedience multiplier; absent for step receivers, where u_y vanishes.
    pub q: Option<f64>,
    /// Posterior weight on chi1.
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NadMethod {
    Shooting,
    /// κ·F(χ1(y)) = (1 − κ)·(1 − F(y)) with χ2(y) = y.
    QuantileClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NadSolution {
    pub method: NadMethod,
    pub y_low: f64,
    pub y_high: f64,
    /// Sorted by increasing y; the last node is (ȳ, x_min, x_max).
    pub nodes: Vec<NadNode>,
    /// Relative miss of q(y̲) against −V_y/u_y at (y̲, χ(y̲)).
    pub terminal_residual: f64,
    /// χ2 − χ1 where the integration stopped.
    pub collision_gap: f64,
    /// Largest |V_y + q·u_y + q′·u| at either contact state over the nodes.
    pub foc_residual: f64,
    /// |prior mass swept by the pairs − 1|.
    pub mass_residual: f64,
    /// Sender's expected payoff under the continuum solution.
    pub objective: f64,
    pub shooting_iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct NadOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Collision is declared once χ2 − χ1 falls to this fraction of the state range.
    pub collision_gap: f64,
    /// Largest step as a fraction of the state range; bounds node spacing.
    pub max_step: f64,
    pub max_bisections: usize,
    /// Require a strictly dipped sdpd verdict and a holding NAD condition first.
    pub check_preconditions: bool,
}

impl Default for NadOptions {
    fn default() -> Self {
        NadOptions {
            rtol: 1e-8,
            atol: 1e-10,
            collision_gap: 1e-7,
            max_step: 1.0 / 512.0,
            max_bisections: 200,
            check_preconditions: true,
        }
    }
}

/// Node count for closed-form solutions.
const CLOSED_FORM_NODES: usize = 1025;

impl NadSolution {
    fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
        let (x0, x1) = (xs[k - 1], xs[k]);
        let w = if x1 > x0 { ((x - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 0.0 };
        ys[k - 1] + w * (ys[k] - ys[k - 1])
    }

    /// (χ1(y), χ2(y)) by linear interpolation, for y in [y̲, ȳ].
    pub fn chi_at(&self, y: f64) -> Option<(f64, f64)> {
        if !(y >= self.y_low && y <= self.y_high) || self.nodes.len() < 2 {
            return None;
        }
        let ys: Vec<f64> = self.nodes.iter().map(|n| n.y).collect();
        let c1: Vec<f64> = self.nodes.iter().map(|n| n.chi1).collect();
        let c2: Vec<f64> = self.nodes.iter().map(|n| n.chi2).collect();
        Some((Self::interp(&ys, &c1, y), Self::interp(&ys, &c2, y)))
    }

    /// The action the solution assigns to state x.
    pub fn action_for_state(&self, x: f64) -> f64 {
        let first = &self.nodes[0];
        if x <= first.chi1 {
            // χ1 falls with y: read the nodes back to front.
            let c1: Vec<f64> = self.nodes.iter().rev().map(|n| n.chi1).collect();
            let ys: Vec<f64> = self.nodes.iter().rev().map(|n| n.y).collect();
            Self::interp(&c1, &ys, x)
        } else if x >= first.chi2 {
            let c2: Vec<f64> = self.nodes.iter().map(|n| n.chi2).collect();
            let ys: Vec<f64> = self.nodes.iter().map(|n| n.y).collect();
            Self::interp(&c2, &ys, x)
        } else {
            self.y_low
        }
    }

    pub fn triples(&self) -> Vec<(f64, f64, f64)> {
        self.nodes.iter().map(|n| (n.y, n.chi1, n.chi2)).collect()
    }

    pub fn q_nodes(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().filter_map(|n| n.q.map(|q| (n.y, q))).collect()
    }
}

/// Solves for the negative assortative signal with the default options.
pub fn solve_nad(problem: &Problem, density: &dyn Fn(f64) -> f64) -> Result<NadSolution> {
    solve_nad_with(problem, density, &NadOptions::default())
}

pub fn solve_nad_with(problem: &Problem, density: &dyn Fn(f64) -> f64, opts: &NadOptions) -> Result<NadSolution> {
    let (lo, hi) = (problem.states().min(), problem.states().max());
    let prior = PriorTable::new(density, lo, hi)?;
    if let Family::Quantile { kappa } = problem.family() {
        return Ok(quantile_solution(problem, &prior, kappa));
    }
    if opts.check_preconditions {
        let sdpd = check_sdpd_sufficient(problem);
        if sdpd.label != SdpdLabel::DippedStrict {
            return Err(Error::IllPosed(format!(
                "the shooting solver needs a strictly dipped sdpd verdict, got {}",
                sdpd.label.as_str()
            )));
        }
        let nad = check_nad_condition(problem);
        if !nad.verdict.holds() {
            return Err(Error::IllPosed(format!("the NAD condition does not hold: {:?}", nad.verdict)));
        }
    }
    if prior.min_density() <= 0.0 {
        return Err(Error::InvalidPrior("the shooting solver needs a density that is positive on the state range".into()));
    }
    Shooter::new(problem, prior, opts).solve()
}

fn quantile_solution(problem: &Problem, prior: &PriorTable, kappa: f64) -> NadSolution {
    let (lo, hi) = (problem.states().min(), problem.states().max());
    let y_low = prior.quantile(1.0 - kappa);
    let chi1 = |y: f64| prior.quantile((1.0 - kappa) * (1.0 - prior.cdf(y)) / kappa);
    let nodes: Vec<NadNode> = (0..CLOSED_FORM_NODES)
        .map(|k| {
            let y = if k + 1 == CLOSED_FORM_NODES { hi } else { y_low + (hi - y_low) * k as f64 / (CLOSED_FORM_NODES - 1) as f64 };
            let c1 = if k + 1 == CLOSED_FORM_NODES { lo } else { chi1(y) };
            NadNode { y, chi1: c1, chi2: y, q: None, rho: 1.0 - kappa }
        })
        .collect();
    // Each y ≥ y̲ carries density f(y)/κ, split (1 − κ, κ) over (χ1(y), y).
    let payoff = |y: f64| prior.density(y) / kappa * ((1.0 - kappa) * problem.v(y, chi1(y)) + kappa * problem.v(y, y));
    let m = CLOSED_FORM_NODES - 1;
    let h = (hi - y_low) / m as f64;
    let objective = (0..m)
        .map(|k| {
            let a = y_low + h * k as f64;
            h / 6.0 * (payoff(a) + 4.0 * payoff(a + 0.5 * h) + payoff(a + h))
        })
        .sum();
    NadSolution {
        method: NadMethod::QuantileClosedForm,
        y_low,
        y_high: hi,
        nodes,
        terminal_residual: 0.0,
        collision_gap: 0.0,
        foc_residual: 0.0,
        mass_residual: ((1.0 - prior.cdf(y_low)) / kappa - 1.0).abs(),
        objective,
        shooting_iterations: 0,
    }
}

/// The envelope pair solved for (q, q′), and the pieces of its y-derivative.
struct Pinned {
    q: f64,
    dq: f64,
    /// D²·(q′ − ∂q/∂y) and D²·(∂q/∂χ1·k + ∂q/∂χ2), with k = dχ1/dχ2.
    a: f64,
    b: f64,
}

struct Shooter<'a> {
    p: &'a Problem,
    prior: PriorTable<'a>,
    xmin: f64,
    xmax: f64,
    tol: Tolerances,
    gap: f64,
    max_bisections: usize,
}

/// Integration state: [y, χ1, q, swept payoff, swept mass] against τ = x_max − χ2.
type State = [f64; 5];

struct Shot {
    run: Run<5>,
    residual: f64,
}

impl<'a> Shooter<'a> {
    fn new(p: &'a Problem, prior: PriorTable<'a>, opts: &NadOptions) -> Self {
        let (xmin, xmax) = (p.states().min(), p.states().max());
        let range = xmax - xmin;
        Shooter {
            p,
            prior,
            xmin,
            xmax,
            tol: Tolerances {
                rtol: opts.rtol,
                atol: opts.atol,
                h_max: opts.max_step * range,
                h_min: 1e-14 * range.max(1.0),
                max_steps: 1_000_000,
            },
            gap: opts.collision_gap * range,
            max_bisections: opts.max_bisections,
        }
    }

    fn pinned(&self, y: f64, c1: f64, c2: f64, k: f64) -> Pinned {
        let p = self.p;
        let (u1, u2) = (p.u(y, c1), p.u(y, c2));
        let (vy1, vy2) = (p.v_y(y, c1), p.v_y(y, c2));
        let (uy1, uy2) = (p.u_y(y, c1), p.u_y(y, c2));
        let (ux1, ux2) = (p.u_x(y, c1), p.u_x(y, c2));
        let n = vy1 * u2 - vy2 * u1;
        let d = u1 * uy2 - u2 * uy1;
        let m = vy1 * uy2 - vy2 * uy1;
        let n1 = p.v_yx(y, c1) * u2 - vy2 * ux1;
        let d1 = ux1 * uy2 - u2 * p.u_yx(y, c1);
        let n2 = vy1 * ux2 - p.v_yx(y, c2) * u1;
        let d2 = u1 * p.u_yx(y, c2) - ux2 * uy1;
        let ny = p.v_yy(y, c1) * u2 + vy1 * uy2 - p.v_yy(y, c2) * u1 - vy2 * uy1;
        let dy = u1 * p.u_yy(y, c2) - u2 * p.u_yy(y, c1);
        Pinned {
            q: n / d,
            dq: -m / d,
            a: -m * d - (ny * d - n * dy),
            b: k * (n1 * d - n * d1) + (n2 * d - n * d2),
        }
    }

    fn rhs(&self, tau: f64, z: &State) -> Option<State> {
        let (y, c1, c2) = (z[0], z[1], self.xmax - tau);
        let (u1, u2) = (self.p.u(y, c1), self.p.u(y, c2));
        if !(u1 < 0.0 && u2 > 0.0 && c1 < c2) {
            return None;
        }
        let (f1, f2) = (self.prior.density(c1), self.prior.density(c2));
        let k = u2 * f2 / (u1 * f1);
        let pin = self.pinned(y, c1, c2, k);
        let dy = pin.b / pin.a;
        let ds = [
            dy,
            k,
            pin.dq * dy,
            -self.p.v(y, c2) * f2 + self.p.v(y, c1) * f1 * k,
            -f2 + f1 * k,
        ];
        // d/dτ = −d/dχ2.
        let out = ds.map(|v| -v);
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    fn admissible(&self, tau: f64, z: &State) -> bool {
        let (y, c1, c2) = (z[0], z[1], self.xmax - tau);
        z.iter().all(|v| v.is_finite()) && c1 >= self.xmin && c1 < c2 && self.p.u(y, c1) < 0.0 && self.p.u(y, c2) > 0.0
    }

    /// (χ2 − χ) − (χ − χ1) at the stopping point: positive when χ1 reached χ(y) first.
    fn residual(&self, tau: f64, z: &State) -> f64 {
        let (y, c1, c2) = (z[0], z[1], self.xmax - tau);
        match chi(self.p, y) {
            Ok(c) => (c2 - c) - (c - c1),
            Err(_) => self.p.u(y, c2) / self.p.u_x(y, c2) + self.p.u(y, c1) / self.p.u_x(y, c1),
        }
    }

    fn start(&self, ybar: f64) -> State {
        let (u1, u2) = (self.p.u(ybar, self.xmin), self.p.u(ybar, self.xmax));
        let q = if u1 < 0.0 && u2 > 0.0 { self.pinned(ybar, self.xmin, self.xmax, 0.0).q } else { f64::NAN };
        [ybar, self.xmin, q, 0.0, 0.0]
    }

    fn shoot(&self, ybar: f64, mut record: Option<&mut Vec<(f64, State)>>) -> Shot {
        let run = integrate(
            |t, z| self.rhs(t, z),
            |t, z| self.admissible(t, z),
            |t, z| self.xmax - t - z[1] <= self.gap,
            0.0,
            self.start(ybar),
            self.xmax - self.xmin,
            &self.tol,
            |t, z| {
                if let Some(r) = record.as_deref_mut() {
                    r.push((t, *z));
                }
            },
        );
        let residual = self.residual(run.t, &run.z);
        Shot { run, residual }
    }

    fn bracket(&self) -> Result<(f64, f64)> {
        let (ylo, yhi) = self.p.action_range();
        let mean_u = |y: f64| self.prior.expect(|x| self.p.u(y, x));
        let top_u = |y: f64| self.p.u(y, self.xmax);
        for (name, g) in [("γ(φ)", &mean_u as &dyn Fn(f64) -> f64), ("γ(δ_max)", &top_u)] {
            if !(g(ylo) >= 0.0 && g(yhi) <= 0.0) {
                return Err(Error::ShootingFailed(format!("{name} is not inside the action range [{ylo}, {yhi}]")));
            }
        }
        Ok((bisect(mean_u, ylo, yhi, false), bisect(top_u, ylo, yhi, false)))
    }

    fn solve(&self) -> Result<NadSolution> {
        let (blo, bhi) = self.bracket()?;
        let r = |y: f64| self.shoot(y, None).residual;
        let (mut a, mut b) = (blo, bhi);
        let (mut ra, rb) = (r(a), r(b));
        let mut iterations = 2;
        if ra.signum() == rb.signum() {
            // Scan for an interior sign change before giving up.
            let ys: Vec<f64> = (0..=32).map(|k| blo + (bhi - blo) * k as f64 / 32.0).collect();
            let rs: Vec<f64> = ys.iter().map(|&y| r(y)).collect();
            iterations += ys.len();
            match (1..ys.len()).find(|&k| rs[k - 1].signum() != rs[k].signum()) {
                Some(k) => {
                    (a, b, ra) = (ys[k - 1], ys[k], rs[k - 1]);
                }
                None => {
                    let curve: Vec<String> = ys.iter().zip(&rs).map(|(y, v)| format!("({y:.6}, {v:.3e})")).collect();
                    return Err(Error::ShootingFailed(format!(
                        "no sign change of the terminal residual on ȳ ∈ [{blo}, {bhi}]; residual curve: {}",
                        curve.join(" ")
                    )));
                }
            }
        }
        for _ in 0..self.max_bisections {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let rm = r(mid);
            iterations += 1;
            if rm == 0.0 {
                (a, b) = (mid, mid);
                break;
            }
            if rm.signum() == ra.signum() {
                (a, ra) = (mid, rm);
            } else {
                b = mid;
            }
        }
        let ybar = 0.5 * (a + b);
        let mut path = Vec::new();
        let shot = self.shoot(ybar, Some(&mut path));
        if shot.run.stop == Stop::Underflow {
            return Err(Error::StiffStep { y: shot.run.z[0] });
        }
        Ok(self.assemble(ybar, &shot, &path, iterations))
    }

    fn assemble(&self, ybar: f64, shot: &Shot, path: &[(f64, State)], iterations: usize) -> NadSolution {
        let p = self.p;
        let mut nodes = Vec::with_capacity(path.len());
        let mut foc = 0.0f64;
        for (t, z) in path.iter().rev() {
            let (y, c1, c2, q) = (z[0], z[1], self.xmax - t, z[2]);
            let (u1, u2) = (p.u(y, c1), p.u(y, c2));
            let rho = if u2 > u1 { u2 / (u2 - u1) } else { 0.5 };
            let dq = self.pinned(y, c1, c2, 0.0).dq;
            if dq.is_finite() {
                for (c, u) in [(c1, u1), (c2, u2)] {
                    foc = foc.max((p.v_y(y, c) + q * p.u_y(y, c) + dq * u).abs());
                }
            }
            nodes.push(NadNode { y, chi1: c1, chi2: c2, q: Some(q), rho });
        }
        let (t, z) = (shot.run.t, shot.run.z);
        let y_low = z[0];
        let terminal_residual = match chi(p, y_low) {
            Ok(c) => {
                let target = -p.v_y(y_low, c) / p.u_y(y_low, c);
                (z[2] - target).abs() / target.abs().max(1.0)
            }
            Err(_) => f64::INFINITY,
        };
        NadSolution {
            method: NadMethod::Shooting,
            y_low,
            y_high: ybar,
            nodes,
            terminal_residual,
            collision_gap: self.xmax - t - z[1],
            foc_residual: foc,
            mass_residual: (z[4] - 1.0).abs(),
            objective: z[3],
            shooting_iterations: iterations,
        }
    }
}

#[cfg(test)]
mod tests;
