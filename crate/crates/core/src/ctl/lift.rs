//! Turning paths through reduced structures into concrete executions.

use crate::counter::{from_counter, CounterState};
use crate::error::{Error, Result};
use crate::frontend::{GlobalState, Program};
use crate::kripke::{KripkeStructure, Path, STUTTER};
use crate::quotient::QuotientStructure;
use crate::symmetry::{Canonicalizer, PermGroup};

use super::path_actions;

/// A concrete execution: `actions[i]` leads from `states[i]` to `states[i+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<GlobalState>,
    pub actions: Vec<String>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> &GlobalState {
        self.states.last().expect("a trace has at least one state")
    }
}

/// Follows a sequence of representatives with concrete states, starting at
/// the program's initial state. At each step the least successor (in
/// canonical order) whose representative is the next abstract state is
/// taken. Failure means successors and permutations do not commute.
pub fn lift_counterexample(program: &Program, canon: &Canonicalizer, reps: &[GlobalState]) -> Result<Trace> {
    let Some(first) = reps.first() else {
        return Err(Error::LiftFailed {
            step: 0,
            reason: "empty path".to_string(),
        });
    };
    let start = program.initial_state();
    if &canon.canonical(&start)? != first {
        return Err(Error::LiftFailed {
            step: 0,
            reason: "path does not start at the representative of the initial state".to_string(),
        });
    }
    let mut states = vec![start];
    let mut actions = Vec::new();
    for (step, wanted) in reps.iter().enumerate().skip(1) {
        let current = states.last().expect("non-empty");
        let mut best: Option<(GlobalState, String)> = None;
        for (action, t) in program.successors(current) {
            if &canon.canonical(&t)? == wanted && best.as_ref().is_none_or(|(b, a)| (&t, &action) < (b, a)) {
                best = Some((t, action));
            }
        }
        match best {
            Some((t, action)) => {
                states.push(t);
                actions.push(action);
            }
            // a totalization loop on a deadlocked representative
            None if wanted == &reps[step - 1] && program.successors(current).is_empty() => {
                states.push(current.clone());
                actions.push(STUTTER.to_string());
            }
            None => {
                return Err(Error::LiftFailed {
                    step,
                    reason: format!("no successor of {} maps to {}", program.render_state(current), program.render_state(wanted)),
                })
            }
        }
    }
    Ok(Trace { states, actions })
}

pub fn lift_quotient_path(program: &Program, quotient: &QuotientStructure, path: &Path) -> Result<Trace> {
    let reps = payloads(&quotient.structure, path)?;
    lift_counterexample(program, &quotient.canonicalizer, &reps)
}

pub fn lift_counter_path(program: &Program, counter: &KripkeStructure<CounterState>, path: &Path) -> Result<Trace> {
    let reps: Vec<GlobalState> = payloads(counter, path)?.iter().map(from_counter).collect();
    let canon = Canonicalizer::new(program, PermGroup::full_symmetric(program.n))?;
    lift_counterexample(program, &canon, &reps)
}

/// A path of the full structure is already concrete.
pub fn full_trace(full: &KripkeStructure<GlobalState>, path: &Path) -> Result<Trace> {
    Ok(Trace {
        states: payloads(full, path)?,
        actions: path_actions(full, path),
    })
}

fn payloads<P: Clone + Eq + std::hash::Hash>(k: &KripkeStructure<P>, path: &Path) -> Result<Vec<P>> {
    path.states
        .iter()
        .map(|&s| k.payload(s).cloned().ok_or(Error::UnknownState(s)))
        .collect()
}
