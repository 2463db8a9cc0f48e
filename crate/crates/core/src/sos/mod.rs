//! Operational semantics: map-indexed (`sigma`) and condition-labelled (`cond`).

pub mod canon;
pub mod cond;
pub mod sigma;

pub use canon::canon;
pub use cond::{build_cond_lts, expand_to_sigma, step_cond, terminates_cond, CondLts, CondSos, CondTransition};
pub use sigma::{build_lts, build_lts_over, communicate, step, terminates, SigmaLts, Transition};

#[cfg(test)]
mod tests;
