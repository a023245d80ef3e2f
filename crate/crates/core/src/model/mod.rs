//! Problem instances on finite grids and the receiver's best response.

mod assumptions;
mod grid;
mod outcome;
mod posterior;
mod problem;
mod receiver;

pub use assumptions::{check_assumptions, AssumptionId, AssumptionReport, Violation};
pub use grid::{Grid, GridKind};
pub use outcome::Outcome;
pub use posterior::{Posterior, Signal};
pub use problem::{eval, CellFilter, Density, Eval, Family, Kernel, OrderingMode, Problem, ProblemBuilder, TieBreak};
pub(crate) use receiver::bisect;
pub use receiver::{chi, foc_value, gamma, indirect_utility, signal_to_outcome, ROOT_TOL};

#[cfg(test)]
mod tests;
