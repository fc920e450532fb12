//! The quotient structure over orbit representatives.
//!
//! Only representatives are ever expanded: each successor of a
//! representative is canonicalized before insertion. This is sound because
//! the guard language makes every process permutation commute with the
//! successor relation.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::explore::{run_bfs, ExplorationStats, ExploreOptions, Mode, TransitionSystem};
use crate::frontend::{GlobalState, Program};
use crate::kripke::{AtomicProp, KripkeStructure, StateId};
use crate::symmetry::{factorial, Canonicalizer, PermGroup, Permutation, RepMode};

/// Largest full structure [`check_bisimulation`] accepts.
pub const BISIMULATION_CAP: usize = 10_000;

#[derive(Debug, Clone)]
pub struct QuotientStructure {
    /// Payloads are representatives. Action labels keep the process index
    /// of the expanded representative, so they are representative-relative.
    pub structure: KripkeStructure<GlobalState>,
    /// Orbit size per state id.
    pub orbit_size: Vec<u128>,
    pub canonicalizer: Canonicalizer,
}

impl QuotientStructure {
    pub fn rep_mode(&self) -> RepMode {
        self.canonicalizer.mode()
    }

    pub fn group(&self) -> &PermGroup {
        self.canonicalizer.group()
    }

    /// Sum of orbit sizes: the number of concrete states covered.
    pub fn covered_states(&self) -> u128 {
        self.orbit_size.iter().sum()
    }
}

struct QuotientSystem<'a> {
    program: &'a Program,
    canon: &'a Canonicalizer,
}

impl TransitionSystem for QuotientSystem<'_> {
    type State = GlobalState;

    fn props(&self) -> Vec<AtomicProp> {
        self.program.atomic_props()
    }

    fn initial(&self) -> Result<Vec<GlobalState>> {
        self.program
            .initial_states()
            .iter()
            .map(|s| self.canon.canonical(s))
            .collect()
    }

    fn successors(&self, state: &GlobalState) -> Result<Vec<(String, GlobalState)>> {
        self.program
            .successors(state)
            .into_iter()
            .map(|(a, t)| Ok((a, self.canon.canonical(&t)?)))
            .collect()
    }

    fn labels(&self, state: &GlobalState) -> Result<BTreeSet<String>> {
        let labels = self.program.state_props(state);
        for g in self.canon.group().generators() {
            if self.program.state_props(&g.apply(state)?) != labels {
                return Err(Error::LabelSymmetry {
                    state: self.program.render_state(state),
                    permutation: g.to_string(),
                });
            }
        }
        Ok(labels)
    }
}

pub fn build_quotient(program: &Program, group: PermGroup, state_bound: usize) -> Result<QuotientStructure> {
    let options = ExploreOptions {
        state_bound,
        ..ExploreOptions::default()
    };
    build_quotient_with(program, group, &options).map(|(q, _)| q)
}

pub fn build_quotient_with(
    program: &Program,
    group: PermGroup,
    options: &ExploreOptions,
) -> Result<(QuotientStructure, ExplorationStats)> {
    let canonicalizer = Canonicalizer::new(program, group)?;
    let (structure, stats) = run_bfs(
        &QuotientSystem {
            program,
            canon: &canonicalizer,
        },
        Mode::Quotient,
        options,
    )?;
    let orbit_size = structure
        .payloads()
        .iter()
        .map(|rep| canonicalizer.orbit_size(rep))
        .collect::<Result<Vec<_>>>()?;
    if let Some(n_fact) = factorial(program.n) {
        debug_assert!(orbit_size.iter().all(|&o| n_fact % o == 0));
    }
    Ok((
        QuotientStructure {
            structure,
            orbit_size,
            canonicalizer,
        },
        stats,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelViolation {
    pub state: GlobalState,
    pub permutation: Permutation,
    pub expected: BTreeSet<String>,
    pub found: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymmetryReport {
    pub checked: usize,
    pub violations: Vec<LabelViolation>,
}

impl SymmetryReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `labels(g·s) = labels(s)` for every generator of Sym(n) and every
/// sampled state. Violations are reported, not raised.
pub fn check_symmetric_labeling<'a>(
    program: &Program,
    sample: impl IntoIterator<Item = &'a GlobalState>,
) -> Result<SymmetryReport> {
    let group = PermGroup::full_symmetric(program.n);
    let mut report = SymmetryReport::default();
    for state in sample {
        report.checked += 1;
        let expected = program.state_props(state);
        for g in group.generators() {
            let found = program.state_props(&g.apply(state)?);
            if found != expected {
                report.violations.push(LabelViolation {
                    state: state.clone(),
                    permutation: g.clone(),
                    expected: expected.clone(),
                    found,
                });
            }
        }
    }
    Ok(report)
}

/// Verifies that `{(s, Rep(s))}` is a bisimulation between a totalized full
/// structure and a totalized quotient. Returns the first failed condition.
pub fn bisimulation_discrepancy(
    full: &KripkeStructure<GlobalState>,
    quotient: &QuotientStructure,
) -> Result<Option<String>> {
    if full.len() > BISIMULATION_CAP {
        return Err(Error::SizeCapExceeded {
            size: full.len(),
            cap: BISIMULATION_CAP,
        });
    }
    let q = &quotient.structure;
    for (name, k) in [("full", full.is_total()), ("quotient", q.is_total())] {
        if !k {
            let count = if name == "full" { full.deadlocks().len() } else { q.deadlocks().len() };
            return Err(Error::NonTotal { count });
        }
    }
    let canon = &quotient.canonicalizer;

    let mut rep_of: Vec<StateId> = Vec::with_capacity(full.len());
    for (s, payload) in full.payloads().iter().enumerate() {
        let rep = canon.canonical(payload)?;
        let Some(r) = q.id_of(&rep) else {
            return Ok(Some(format!("full state {s} has no representative in the quotient")));
        };
        if full.label_set(s) != q.label_set(r) {
            return Ok(Some(format!("labels differ between full state {s} and quotient state {r}")));
        }
        rep_of.push(r);
    }
    for &s in full.init() {
        if !q.init().contains(&rep_of[s]) {
            return Ok(Some(format!("initial state {s} maps to non-initial quotient state")));
        }
    }

    // forth: every concrete step is matched by an abstract one
    for s in 0..full.len() {
        for (_, t) in full.successors(s) {
            if !q.has_edge_between(rep_of[s], rep_of[t]) {
                return Ok(Some(format!(
                    "forth: edge {s} -> {t} has no quotient edge {} -> {}",
                    rep_of[s], rep_of[t]
                )));
            }
        }
    }
    // back: every abstract step from Rep(s) is matched from s itself
    let mut targets_of: HashMap<StateId, BTreeSet<StateId>> = HashMap::new();
    for s in 0..full.len() {
        let reps = targets_of.entry(s).or_default();
        reps.extend(full.successors(s).map(|(_, t)| rep_of[t]));
    }
    for s in 0..full.len() {
        let reachable = &targets_of[&s];
        for (_, t_bar) in q.successors(rep_of[s]) {
            if !reachable.contains(&t_bar) {
                return Ok(Some(format!(
                    "back: quotient edge {} -> {t_bar} not matched from full state {s}",
                    rep_of[s]
                )));
            }
        }
    }
    Ok(None)
}

pub fn check_bisimulation(full: &KripkeStructure<GlobalState>, quotient: &QuotientStructure) -> Result<bool> {
    bisimulation_discrepancy(full, quotient).map(|d| d.is_none())
}
