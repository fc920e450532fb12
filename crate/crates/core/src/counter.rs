//! Counter abstraction: a global state up to process identity is the shared
//! valuation plus how many processes occupy each local record.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::explore::{run_bfs, ExplorationStats, ExploreOptions, Mode, TransitionSystem};
use crate::frontend::{GlobalState, LocalRecord, OtherProcs, Population, Program, Value, VarType};
use crate::kripke::{AtomicProp, KripkeStructure, StateId};
use crate::quotient::QuotientStructure;

/// Shared valuation plus occupancy counts. Only nonzero counts are stored,
/// so equal abstract states are equal as values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterState {
    pub shared: Vec<Value>,
    pub counts: BTreeMap<LocalRecord, u32>,
}

impl CounterState {
    pub fn population(&self) -> u32 {
        self.counts.values().sum()
    }
}

pub fn to_counter(state: &GlobalState) -> Result<CounterState> {
    if state.has_pid_values() {
        return Err(Error::UnsupportedAbstraction(
            "state carries pid-typed shared values".to_string(),
        ));
    }
    let mut counts = BTreeMap::new();
    for local in &state.locals {
        *counts.entry(*local).or_insert(0) += 1;
    }
    Ok(CounterState {
        shared: state.shared.clone(),
        counts,
    })
}

/// The sorted concrete state with these occupancies.
pub fn from_counter(state: &CounterState) -> GlobalState {
    let locals = state
        .counts
        .iter()
        .flat_map(|(record, &count)| std::iter::repeat_n(*record, count as usize))
        .collect();
    GlobalState {
        shared: state.shared.clone(),
        locals,
    }
}

/// Rejects programs the abstraction cannot represent exactly.
pub fn check_counter_support(program: &Program) -> Result<()> {
    if let Some(decl) = program.shared.iter().find(|d| d.ty == VarType::Pid) {
        return Err(Error::UnsupportedAbstraction(format!(
            "pid-typed shared variable `{}`",
            decl.name
        )));
    }
    if program.uses_asymmetric_atoms() {
        return Err(Error::UnsupportedAbstraction(
            "guard or label refers to a specific process index".to_string(),
        ));
    }
    Ok(())
}

struct Occupancy<'a>(&'a BTreeMap<LocalRecord, u32>);

impl Population for Occupancy<'_> {
    fn count_at(&self, pc: u16) -> u32 {
        self.0.iter().filter(|(r, _)| r.pc == pc).map(|(_, c)| c).sum()
    }

    fn process_at(&self, _process: u32, _pc: u16) -> Option<bool> {
        None
    }
}

/// The other processes seen by one process at `me`: the counts with that one
/// process taken out.
struct OthersByCount<'a> {
    counts: &'a BTreeMap<LocalRecord, u32>,
    me: LocalRecord,
}

impl OtherProcs for OthersByCount<'_> {
    fn any_other_at(&self, pc: u16) -> bool {
        let here = Occupancy(self.counts).count_at(pc);
        let excluded = u32::from(self.me.pc == pc);
        here - excluded >= 1
    }
}

pub fn counter_successors(program: &Program, state: &CounterState) -> Vec<(String, CounterState)> {
    let mut result = Vec::new();
    for (&record, &count) in &state.counts {
        debug_assert!(count >= 1);
        let others = OthersByCount {
            counts: &state.counts,
            me: record,
        };
        for (c, cmd) in program.commands.iter().enumerate() {
            if cmd.from_pc != record.pc || !program.guard_holds(&cmd.guard, &state.shared, &record, None, &others) {
                continue;
            }
            for (shared, next_record) in program.fire(cmd, &state.shared, &record, None) {
                let mut counts = state.counts.clone();
                match counts.get_mut(&record) {
                    Some(1) => {
                        counts.remove(&record);
                    }
                    Some(k) => *k -= 1,
                    None => unreachable!("firing record is occupied"),
                }
                *counts.entry(next_record).or_insert(0) += 1;
                result.push((
                    format!("c{c}@{}", program.render_local(&record)),
                    CounterState { shared, counts },
                ));
            }
        }
    }
    result
}

pub fn counter_props(program: &Program, state: &CounterState) -> BTreeSet<String> {
    program.props_for(&state.shared, &Occupancy(&state.counts))
}

struct CounterSystem<'a> {
    program: &'a Program,
}

impl TransitionSystem for CounterSystem<'_> {
    type State = CounterState;

    fn props(&self) -> Vec<AtomicProp> {
        self.program.atomic_props()
    }

    fn initial(&self) -> Result<Vec<CounterState>> {
        self.program.initial_states().iter().map(to_counter).collect()
    }

    fn successors(&self, state: &CounterState) -> Result<Vec<(String, CounterState)>> {
        Ok(counter_successors(self.program, state))
    }

    fn labels(&self, state: &CounterState) -> Result<BTreeSet<String>> {
        debug_assert_eq!(state.population() as usize, self.program.n);
        Ok(counter_props(self.program, state))
    }
}

pub fn build_counter_structure(program: &Program, state_bound: usize) -> Result<KripkeStructure<CounterState>> {
    let options = ExploreOptions {
        state_bound,
        ..ExploreOptions::default()
    };
    build_counter_with(program, &options).map(|(k, _)| k)
}

pub fn build_counter_with(
    program: &Program,
    options: &ExploreOptions,
) -> Result<(KripkeStructure<CounterState>, ExplorationStats)> {
    check_counter_support(program)?;
    run_bfs(&CounterSystem { program }, Mode::Counter, options)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsomorphismReport {
    pub isomorphic: bool,
    pub discrepancy: Option<String>,
}

impl IsomorphismReport {
    fn mismatch(reason: String) -> Self {
        Self {
            isomorphic: false,
            discrepancy: Some(reason),
        }
    }
}

/// Checks that `from_counter` is a bijection from counter states onto
/// quotient states preserving labels, initial states and edges in both
/// directions (action labels ignored).
pub fn check_isomorphism(counter: &KripkeStructure<CounterState>, quotient: &QuotientStructure) -> IsomorphismReport {
    let q = &quotient.structure;
    if counter.len() != q.len() {
        return IsomorphismReport::mismatch(format!(
            "{} counter states vs {} quotient states",
            counter.len(),
            q.len()
        ));
    }
    let mut image: Vec<StateId> = Vec::with_capacity(counter.len());
    let mut hit = vec![false; q.len()];
    for (c, state) in counter.payloads().iter().enumerate() {
        let Some(r) = q.id_of(&from_counter(state)) else {
            return IsomorphismReport::mismatch(format!("counter state {c} has no quotient counterpart"));
        };
        if std::mem::replace(&mut hit[r], true) {
            return IsomorphismReport::mismatch(format!("quotient state {r} is hit twice"));
        }
        if counter.label_set(c) != q.label_set(r) {
            return IsomorphismReport::mismatch(format!("labels differ on counter state {c} / quotient state {r}"));
        }
        image.push(r);
    }
    let mapped_init: BTreeSet<StateId> = counter.init().iter().map(|&c| image[c]).collect();
    if &mapped_init != q.init() {
        return IsomorphismReport::mismatch("initial states differ".to_string());
    }
    let counter_edges: BTreeSet<(StateId, StateId)> =
        counter.edges().map(|e| (image[e.source], image[e.target])).collect();
    let quotient_edges: BTreeSet<(StateId, StateId)> = q.edges().map(|e| (e.source, e.target)).collect();
    if let Some(&(s, t)) = counter_edges.difference(&quotient_edges).next() {
        let cs = image.iter().position(|&r| r == s).unwrap_or(s);
        let ct = image.iter().position(|&r| r == t).unwrap_or(t);
        return IsomorphismReport::mismatch(format!(
            "counter edge {cs} -> {ct} has no quotient edge {s} -> {t}"
        ));
    }
    if let Some(&(s, t)) = quotient_edges.difference(&counter_edges).next() {
        let cs = image.iter().position(|&r| r == s).unwrap_or(s);
        let ct = image.iter().position(|&r| r == t).unwrap_or(t);
        return IsomorphismReport::mismatch(format!(
            "quotient edge {s} -> {t} has no counter edge {cs} -> {ct}"
        ));
    }
    IsomorphismReport {
        isomorphic: true,
        discrepancy: None,
    }
}
