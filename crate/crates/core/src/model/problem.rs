use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridKind};
use crate::error::{Error, Result};

/// A real-valued function of `(y, x)`.
pub type Eval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// A prior density on the state range.
pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Predicate marking `(y, x)` cells that may not carry mass.
pub type CellFilter = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

pub fn eval(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Eval {
    Arc::new(f)
}

/// A function of `(y, x)` together with whichever partial derivatives are known in closed form.
/// Missing derivatives are filled in by central differences.
#[derive(Clone)]
pub struct Kernel {
    value: Eval,
    dy: Option<Eval>,
    dx: Option<Eval>,
    dyx: Option<Eval>,
    dyy: Option<Eval>,
}

impl Kernel {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel { value: Arc::new(f), dy: None, dx: None, dyx: None, dyy: None }
    }
    pub fn dy(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dy = Some(Arc::new(f));
        self
    }
    pub fn dx(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dx = Some(Arc::new(f));
        self
    }
    pub fn dyx(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dyx = Some(Arc::new(f));
        self
    }
    pub fn dyy(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dyy = Some(Arc::new(f));
        self
    }

    /// Bilinear interpolant of a table indexed `[action][state]`.
    pub fn tabulated(actions: &Grid, states: &Grid, table: Vec<Vec<f64>>) -> Self {
        let a = actions.clone();
        let s = states.clone();
        Kernel::new(move |y, x| {
            let (j0, j1, ty) = a.bracket(y);
            let (i0, i1, tx) = s.bracket(x);
            let lo = table[j0][i0] * (1.0 - tx) + table[j0][i1] * tx;
            let hi = table[j1][i0] * (1.0 - tx) + table[j1][i1] * tx;
            lo * (1.0 - ty) + hi * ty
        })
    }

    pub fn value(&self) -> &Eval {
        &self.value
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.dy.is_some() && self.dx.is_some() && self.dyx.is_some() && self.dyy.is_some()
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("dy", &self.dy.is_some())
            .field("dx", &self.dx.is_some())
            .field("dyx", &self.dyx.is_some())
            .field("dyy", &self.dyy.is_some())
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// γ(μ) is the root of the first-order condition.
    StrictFoc,
    /// γ(μ) is the largest action with ∫u dμ ≥ 0.
    SenderFavorable,
}

/// Structural family a problem belongs to; lets solvers use closed-form shortcuts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Family {
    Generic,
    /// u = x − y.
    LinearReceiver,
    /// u = 1{x ≥ y} − κ.
    Quantile { kappa: f64 },
}

/// How the ordering assumption is verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// Require V_y > 0 and u_x > 0 on the grid.
    Supermodular,
    /// The instance declares that u is strictly single-crossing in x (in either direction).
    SingleCrossing,
}

/// A persuasion instance on finite grids.
#[derive(Clone)]
pub struct Problem {
    name: String,
    states: Grid,
    actions: Grid,
    prior: Vec<f64>,
    v: Kernel,
    u: Kernel,
    tie_break: TieBreak,
    family: Family,
    ordering: OrderingMode,
    smooth: bool,
    density: Option<Density>,
    forbidden: Option<CellFilter>,
    action_range: (f64, f64),
    hy: f64,
    hx: f64,
    scale: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("states", &self.states.len())
            .field("actions", &self.actions.len())
            .field("tie_break", &self.tie_break)
            .field("family", &self.family)
            .finish()
    }
}

pub struct ProblemBuilder {
    name: String,
    states: Grid,
    actions: Grid,
    prior: Vec<f64>,
    v: Kernel,
    u: Kernel,
    tie_break: TieBreak,
    family: Family,
    ordering: OrderingMode,
    smooth: bool,
    density: Option<Density>,
    forbidden: Option<CellFilter>,
    action_range: Option<(f64, f64)>,
}

impl ProblemBuilder {
    pub fn tie_break(mut self, t: TieBreak) -> Self {
        self.tie_break = t;
        self
    }
    pub fn family(mut self, f: Family) -> Self {
        self.family = f;
        self
    }
    pub fn ordering(mut self, o: OrderingMode) -> Self {
        self.ordering = o;
        self
    }
    pub fn smooth(mut self, s: bool) -> Self {
        self.smooth = s;
        self
    }
    pub fn density(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(f));
        self
    }
    pub fn forbidden(mut self, f: impl Fn(f64, f64) -> bool + Send + Sync + 'static) -> Self {
        self.forbidden = Some(Arc::new(f));
        self
    }
    /// Interval searched by `gamma`; defaults to the action grid's hull.
    pub fn action_range(mut self, lo: f64, hi: f64) -> Self {
        self.action_range = Some((lo, hi));
        self
    }

    pub fn build(self) -> Result<Problem> {
        let ProblemBuilder {
            name,
            states,
            actions,
            prior,
            v,
            u,
            tie_break,
            family,
            ordering,
            smooth,
            density,
            forbidden,
            action_range,
        } = self;
        if states.kind() != GridKind::State || actions.kind() != GridKind::Action {
            return Err(Error::InvalidGrid("grid kinds must be (state, action)".into()));
        }
        if prior.len() != states.len() {
            return Err(Error::ShapeMismatch {
                field: "prior".into(),
                expected: states.len().to_string(),
                found: prior.len().to_string(),
            });
        }
        if let Some((i, w)) = prior.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidPrior(format!("weight {w} at state {i} is negative or not finite")));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPrior(format!("weights sum to {total}, not 1")));
        }
        let action_range = action_range.unwrap_or((actions.min(), actions.max()));
        if !(action_range.1 > action_range.0) {
            return Err(Error::InvalidGrid(format!("empty action range {action_range:?}")));
        }
        let mut scale: f64 = 0.0;
        for &y in actions.points() {
            for &x in states.points() {
                if forbidden.as_ref().is_some_and(|f| f(y, x)) {
                    continue;
                }
                let (vv, uu) = ((v.value)(y, x), (u.value)(y, x));
                if !vv.is_finite() || !uu.is_finite() {
                    return Err(Error::IllPosed(format!("evaluator not finite at (y={y}, x={x})")));
                }
                scale = scale.max(vv.abs());
            }
        }
        if scale == 0.0 {
            scale = 1.0;
        }
        let hy = 1e-5 * (action_range.1 - action_range.0);
        let hx = 1e-5 * states.range();
        Ok(Problem {
            name,
            states,
            actions,
            prior,
            v,
            u,
            tie_break,
            family,
            ordering,
            smooth,
            density,
            forbidden,
            action_range,
            hy,
            hx,
            scale,
        })
    }
}

fn central(f: &Eval, y: f64, x: f64, hy: f64, hx: f64) -> f64 {
    if hy != 0.0 {
        (f(y + hy, x) - f(y - hy, x)) / (2.0 * hy)
    } else {
        (f(y, x + hx) - f(y, x - hx)) / (2.0 * hx)
    }
}

impl Problem {
    pub fn builder(
        name: impl Into<String>,
        states: Grid,
        actions: Grid,
        prior: Vec<f64>,
        v: Kernel,
        u: Kernel,
    ) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            states,
            actions,
            prior,
            v,
            u,
            tie_break: TieBreak::StrictFoc,
            family: Family::Generic,
            ordering: OrderingMode::Supermodular,
            smooth: true,
            density: None,
            forbidden: None,
            action_range: None,
        }
    }

    /// Same instance on different grids (prior re-supplied by the caller).
    pub fn regrid(&self, states: Grid, actions: Grid, prior: Vec<f64>) -> Result<Problem> {
        let mut b = Problem::builder(self.name.clone(), states, actions, prior, self.v.clone(), self.u.clone())
            .tie_break(self.tie_break)
            .family(self.family)
            .ordering(self.ordering)
            .smooth(self.smooth);
        b.density = self.density.clone();
        b.forbidden = self.forbidden.clone();
        b.build()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn states(&self) -> &Grid {
        &self.states
    }
    pub fn actions(&self) -> &Grid {
        &self.actions
    }
    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn ordering(&self) -> OrderingMode {
        self.ordering
    }
    pub fn declared_smooth(&self) -> bool {
        self.smooth
    }
    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }
    pub fn action_range(&self) -> (f64, f64) {
        self.action_range
    }
    /// Largest |V| over admissible grid cells (1 if V vanishes); used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn sender(&self) -> &Kernel {
        &self.v
    }
    pub fn receiver(&self) -> &Kernel {
        &self.u
    }

    /// Under sender-favourable tie-breaking the lowest action carries no obedience
    /// constraint: a receiver with ∫u dμ < 0 at every action stays at the bottom.
    pub fn obedience_free(&self, j: usize) -> bool {
        j == 0 && self.tie_break == TieBreak::SenderFavorable
    }

    /// u(y_j, x_i) as it enters the obedience row of action `j`.
    pub fn obedience_coef(&self, j: usize, i: usize) -> f64 {
        if self.obedience_free(j) {
            0.0
        } else {
            self.u(self.action(j), self.state(i))
        }
    }

    pub fn is_forbidden(&self, y: f64, x: f64) -> bool {
        self.forbidden.as_ref().is_some_and(|f| f(y, x))
    }
    pub fn has_forbidden_cells(&self) -> bool {
        self.forbidden.is_some()
    }

    pub fn v(&self, y: f64, x: f64) -> f64 {
        (self.v.value)(y, x)
    }
    pub fn u(&self, y: f64, x: f64) -> f64 {
        (self.u.value)(y, x)
    }

    pub fn v_y(&self, y: f64, x: f64) -> f64 {
        match &self.v.dy {
            Some(f) => f(y, x),
            None => central(&self.v.value, y, x, self.hy, 0.0),
        }
    }
    pub fn v_yx(&self, y: f64, x: f64) -> f64 {
        match &self.v.dyx {
            Some(f) => f(y, x),
            None => (self.v_y(y, x + self.hx) - self.v_y(y, x - self.hx)) / (2.0 * self.hx),
        }
    }
    pub fn v_yy(&self, y: f64, x: f64) -> f64 {
        match &self.v.dyy {
            Some(f) => f(y, x),
            None => (self.v_y(y + self.hy, x) - self.v_y(y - self.hy, x)) / (2.0 * self.hy),
        }
    }
    pub fn u_y(&self, y: f64, x: f64) -> f64 {
        match &self.u.dy {
            Some(f) => f(y, x),
            None => central(&self.u.value, y, x, self.hy, 0.0),
        }
    }
    pub fn u_x(&self, y: f64, x: f64) -> f64 {
        match &self.u.dx {
            Some(f) => f(y, x),
            None => central(&self.u.value, y, x, 0.0, self.hx),
        }
    }
    pub fn u_yx(&self, y: f64, x: f64) -> f64 {
        match &self.u.dyx {
            Some(f) => f(y, x),
            None => (self.u_y(y, x + self.hx) - self.u_y(y, x - self.hx)) / (2.0 * self.hx),
        }
    }
    pub fn u_yy(&self, y: f64, x: f64) -> f64 {
        match &self.u.dyy {
            Some(f) => f(y, x),
            None => (self.u_y(y + self.hy, x) - self.u_y(y - self.hy, x)) / (2.0 * self.hy),
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn state(&self, i: usize) -> f64 {
        self.states.get(i)
    }
    pub fn action(&self, j: usize) -> f64 {
        self.actions.get(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(n: usize) -> Problem {
        let s = Grid::uniform(0.0, 1.0, n, GridKind::State).unwrap();
        let a = Grid::uniform(0.0, 1.0, n, GridKind::Action).unwrap();
        let prior = vec![1.0 / n as f64; n];
        let prior = {
            let t: f64 = prior.iter().sum();
            prior.iter().map(|w| w / t).collect()
        };
        Problem::builder("t", s, a, prior, Kernel::new(|y, x| y * y * x), Kernel::new(|y, x| x - y))
            .build()
            .unwrap()
    }

    #[test]
    fn finite_difference_derivatives() {
        let p = linear(5);
        let (y, x) = (0.3, 0.7);
        assert!((p.v_y(y, x) - 2.0 * y * x).abs() < 1e-8);
        assert!((p.v_yx(y, x) - 2.0 * y).abs() < 1e-5);
        assert!((p.v_yy(y, x) - 2.0 * x).abs() < 1e-5);
        assert!((p.u_y(y, x) + 1.0).abs() < 1e-9);
        assert!((p.u_x(y, x) - 1.0).abs() < 1e-9);
        assert!(p.u_yx(y, x).abs() < 1e-5);
    }

    #[test]
    fn prior_validation() {
        let s = Grid::uniform(0.0, 1.0, 3, GridKind::State).unwrap();
        let a = Grid::uniform(0.0, 1.0, 3, GridKind::Action).unwrap();
        let mk = |prior: Vec<f64>| {
            Problem::builder("t", s.clone(), a.clone(), prior, Kernel::new(|y, _| y), Kernel::new(|y, x| x - y))
                .build()
        };
        assert!(matches!(mk(vec![0.5, 0.5]), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(mk(vec![0.5, 0.6, -0.1]), Err(Error::InvalidPrior(_))));
        assert!(matches!(mk(vec![0.5, 0.5, 0.1]), Err(Error::InvalidPrior(_))));
        assert!(mk(vec![0.25, 0.5, 0.25]).is_ok());
    }

    #[test]
    fn tabulated_kernel_interpolates() {
        let s = Grid::uniform(0.0, 1.0, 3, GridKind::State).unwrap();
        let a = Grid::uniform(0.0, 1.0, 2, GridKind::Action).unwrap();
        let k = Kernel::tabulated(&a, &s, vec![vec![0.0, 1.0, 2.0], vec![10.0, 11.0, 12.0]]);
        assert_eq!((k.value())(0.0, 0.5), 1.0);
        assert!(((k.value())(0.5, 0.25) - 5.5).abs() < 1e-12);
    }
}
