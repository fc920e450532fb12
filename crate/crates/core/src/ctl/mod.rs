//! CTL model checking by explicit fixpoints over any [`KripkeStructure`].
//!
//! [`KripkeStructure`]: crate::kripke::KripkeStructure

mod check;
mod formula;
mod lift;

pub use check::{check, path_actions, sat_set, shortest_path, CheckResult, Verdict};
pub use formula::{parse_ctl, CtlFormula};
pub use lift::{full_trace, lift_counter_path, lift_counterexample, lift_quotient_path, Trace};
