//! Structural tests on problems and on optimal plans.

mod chi;
mod disclosure;
mod farkas;
mod monotone;
mod sdpd;
mod split;
mod twist;

pub use chi::{extract_chi, extract_chi_with, ChiPair};
pub use disclosure::{
    check_full_disclosure, check_nad_condition, check_nad_pairs, local_nad_margin, DecidedBy, FullDisclosureReport,
    FullDisclosureVerdict, NadConditionReport, NadCriterion, NadVerdict, RHO_STEPS, RHO_STEPS_FINE,
};
pub use farkas::{decide_alternative, farkas_certificate, perturbation_matrix, FarkasCertificate, FarkasVerdict, Matrix3};
pub use monotone::{
    classify_monotonicity, index_runs, ClassifyOptions, MonotonicityLabel, MonotonicityReport, PlanAtom, PlanSource, PoolingPlan,
    TripleKind, TripleWitness,
};
pub use sdpd::{check_sdpd_sufficient, Ratio, SdpdLabel, SdpdReport, SdpdWitness};
pub use split::pairwise_split;
pub use twist::{check_twist, twist_determinant, TwistTriple, TwistVerdict};
