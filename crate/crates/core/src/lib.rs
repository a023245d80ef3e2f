//! Finite-grid solver and verifier for persuasion problems cast as optimal
//! productive transport.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::too_many_arguments)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod lp;
pub mod model;
pub mod nad;
pub mod presets;
pub mod structure;

pub use error::{Error, Result};
