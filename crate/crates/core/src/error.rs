use thiserror::Error;

use crate::explore::ExplorationStats;
use crate::kripke::StateId;

/// Position-carrying parse failure shared by the program and CTL parsers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("undeclared pc value `{0}`")]
    UndeclaredPc(String),
    #[error("process count must be at least 1, got {0}")]
    InvalidProcessCount(i64),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("program: {0}")]
    Parse(ParseError),

    #[error("property: {0}")]
    CtlParse(ParseError),

    #[error("label `{0}` is not in the structure's atomic proposition set")]
    SchemaLabel(String),

    #[error("duplicate atomic proposition `{0}`")]
    DuplicateProp(String),

    #[error("unknown state id {0}")]
    UnknownState(StateId),

    #[error("deadlocked states: {states:?}")]
    Deadlock { states: Vec<StateId> },

    #[error("transition relation is not total ({count} states without successors)")]
    NonTotal { count: usize },

    #[error("unknown atomic proposition `{0}` in formula")]
    UnknownAtom(String),

    #[error("unknown builtin example `{0}` (expected mutex, broken-mutex or allocator)")]
    UnknownBuiltin(String),

    #[error("process count must be at least 1")]
    InvalidProcessCount,

    #[error("permutation degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),

    #[error("{0} is unsupported for programs with pid-typed shared variables")]
    PidShared(&'static str),

    #[error("counter abstraction unsupported: {0}")]
    UnsupportedAbstraction(String),

    #[error("group enumeration exceeds cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("state bound {bound} exceeded ({frontier} states left unexplored)")]
    BoundExceeded {
        bound: usize,
        frontier: usize,
        stats: Box<ExplorationStats>,
    },

    #[error("structure has {size} states, above the cap of {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("labeling is not symmetric at {state} under {permutation}")]
    LabelSymmetry { state: String, permutation: String },

    #[error("quotient and counter structures disagree: {0}")]
    ModeMismatch(String),

    #[error("counterexample lifting failed at step {step}: {reason}")]
    LiftFailed { step: usize, reason: String },
}

impl Error {
    /// Resource exhaustion as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::BoundExceeded { .. } | Error::GroupTooLarge { .. } | Error::SizeCapExceeded { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
