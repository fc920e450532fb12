use std::hash::Hash;

use serde::Serialize;

use super::CtlFormula;
use crate::error::{Error, Result};
use crate::kripke::{KripkeStructure, Path, StateId, StateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub sat: StateSet,
    /// Shortest path to a violation, for a failing `AG`/`INV`.
    pub counterexample: Option<Path>,
    /// Shortest path to a target, for a holding `EF`.
    pub witness: Option<Path>,
}

/// States satisfying `formula`. The structure must be total and every atom
/// must be one of its propositions.
pub fn sat_set<P: Clone + Eq + Hash>(structure: &KripkeStructure<P>, formula: &CtlFormula) -> Result<StateSet> {
    if !structure.is_total() {
        return Err(Error::NonTotal {
            count: structure.deadlocks().len(),
        });
    }
    if let Some(atom) = formula.atoms().into_iter().find(|a| !structure.has_prop(a)) {
        return Err(Error::UnknownAtom(atom.to_string()));
    }
    Ok(eval(structure, formula))
}

fn eval<P: Clone + Eq + Hash>(k: &KripkeStructure<P>, formula: &CtlFormula) -> StateSet {
    match formula {
        CtlFormula::True => k.all_states(),
        CtlFormula::False => StateSet::new(),
        CtlFormula::Atom(name) => k.states_with_label(name).expect("atoms resolved up front"),
        CtlFormula::Not(f) => {
            let inner = eval(k, f);
            k.all_states().difference(&inner).copied().collect()
        }
        CtlFormula::And(a, b) => eval(k, a).intersection(&eval(k, b)).copied().collect(),
        CtlFormula::Or(a, b) => {
            let mut s = eval(k, a);
            s.extend(eval(k, b));
            s
        }
        CtlFormula::Ex(f) => k.preimage(&eval(k, f)),
        CtlFormula::Eu(a, b) => {
            // least fixpoint of Z = sat(b) | (sat(a) & pre(Z))
            let sa = eval(k, a);
            let sb = eval(k, b);
            let mut z = sb.clone();
            loop {
                let mut next: StateSet = sa.intersection(&k.preimage(&z)).copied().collect();
                next.extend(sb.iter().copied());
                if next == z {
                    return z;
                }
                z = next;
            }
        }
        CtlFormula::Eg(f) => {
            // greatest fixpoint of Z = sat(f) & pre(Z), from sat(f)
            let sf = eval(k, f);
            let mut z = sf.clone();
            loop {
                let next: StateSet = sf.intersection(&k.preimage(&z)).copied().collect();
                if next == z {
                    return z;
                }
                z = next;
            }
        }
    }
}

/// `init ⊆ sat(formula)`, with a counterexample for a failing top-level
/// `AG`/`INV` and a witness for a holding top-level `EF`.
pub fn check<P: Clone + Eq + Hash>(
    structure: &KripkeStructure<P>,
    formula: &CtlFormula,
    init: &StateSet,
) -> Result<CheckResult> {
    let sat = sat_set(structure, formula)?;
    let verdict = if init.is_subset(&sat) {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let mut result = CheckResult {
        verdict,
        sat,
        counterexample: None,
        witness: None,
    };
    match (formula, verdict) {
        (CtlFormula::Not(inner), Verdict::Fails) => {
            if let CtlFormula::Eu(a, target) = inner.as_ref() {
                if **a == CtlFormula::True {
                    let failing: StateSet = init.difference(&result.sat).copied().collect();
                    let goal = eval(structure, target);
                    result.counterexample = shortest_path(structure, &failing, &goal);
                }
            }
        }
        (CtlFormula::Eu(a, target), Verdict::Holds) if **a == CtlFormula::True => {
            let goal = eval(structure, target);
            result.witness = shortest_path(structure, init, &goal);
        }
        _ => {}
    }
    Ok(result)
}

/// BFS from `sources` to the nearest state of `targets`. Ties go to the
/// smallest state id; parents are the first discoverer in id order.
pub fn shortest_path<P: Clone + Eq + Hash>(
    structure: &KripkeStructure<P>,
    sources: &StateSet,
    targets: &StateSet,
) -> Option<Path> {
    let mut parent: Vec<Option<StateId>> = vec![None; structure.len()];
    let mut visited = vec![false; structure.len()];
    let mut layer: Vec<StateId> = sources.iter().copied().filter(|&s| s < structure.len()).collect();
    for &s in &layer {
        visited[s] = true;
    }
    while !layer.is_empty() {
        if let Some(&hit) = layer.iter().filter(|s| targets.contains(s)).min() {
            let mut states = vec![hit];
            let mut cur = hit;
            while let Some(p) = parent[cur] {
                states.push(p);
                cur = p;
            }
            states.reverse();
            return Some(Path::finite(states));
        }
        layer.sort_unstable();
        let mut next = Vec::new();
        for &s in &layer {
            let mut succ: Vec<StateId> = structure.successors(s).map(|(_, t)| t).collect();
            succ.sort_unstable();
            for t in succ {
                if !visited[t] {
                    visited[t] = true;
                    parent[t] = Some(s);
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    None
}

/// The lexicographically least action label on each step of `path`.
pub fn path_actions<P: Clone + Eq + Hash>(structure: &KripkeStructure<P>, path: &Path) -> Vec<String> {
    path.states
        .windows(2)
        .map(|w| {
            structure
                .successors(w[0])
                .filter(|&(_, t)| t == w[1])
                .map(|(a, _)| a)
                .min()
                .unwrap_or("?")
                .to_string()
        })
        .collect()
}
