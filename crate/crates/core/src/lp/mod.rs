//! The outcome LP, its dual prices, and complementary-slackness checks.

mod duals;
mod instance;
pub mod simplex;

pub use duals::{
    contact_set, default_contact_tol, foc_fit, pair_posterior, solve_dual, solve_dual_explicit,
    verify_complementary_slackness, ContactRow, ContactSet, CsReport, CsRow, DualSource, FocFit, PriceSystem, MASS_TOL,
};
pub use instance::{
    build_lp, build_lp_with_cap, solve_primal, solve_primal_with, LpDims, LpInstance, ObedienceKind, PrimalSolution,
    DEFAULT_SIZE_CAP,
};
pub use simplex::{Pricing, SimplexOptions};

#[cfg(test)]
mod tests;
