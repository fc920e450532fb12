//! Explicit-state CTL model checking for replicated guarded-command programs,
//! with symmetry reduction (orbit representatives) and counter abstraction.
//!
//! The usual pipeline: parse a [`Program`](frontend::Program), build a
//! structure in one of the [`Mode`](explore::Mode)s, totalize it, and run
//! [`ctl::check`]. Counterexamples found on reduced structures are lifted
//! back to concrete executions with the functions in [`ctl`].

pub mod counter;
pub mod ctl;
pub mod error;
pub mod explore;
pub mod frontend;
pub mod kripke;
pub mod quotient;
pub mod symmetry;

pub use error::{Error, ParseError, ParseErrorKind, Result};
