//! Reachability in the three state representations (full, quotient,
//! counter) through a single worklist engine.
//!
//! Exploration is breadth-first and layer-synchronous. Successors of a layer
//! may be computed in parallel, but they are merged in layer order with
//! successors sorted by `(state, action)`, so state numbering is identical
//! with or without parallelism.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::counter::{build_counter_with, CounterState};
use crate::error::{Error, Result};
use crate::frontend::{FullSystem, GlobalState, Program, BAD_LABEL, INIT_LABEL};
use crate::kripke::{AtomicProp, KripkeStructure};
use crate::quotient::{build_quotient_with, QuotientStructure};
use crate::symmetry::PermGroup;

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Quotient,
    Counter,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Full, Mode::Quotient, Mode::Counter];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Quotient => "quotient",
            Mode::Counter => "counter",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "quotient" => Ok(Mode::Quotient),
            "counter" => Ok(Mode::Counter),
            other => Err(format!("unknown mode `{other}` (expected full, quotient or counter)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreOptions {
    pub state_bound: usize,
    /// Halt as soon as a state labeled `bad` is inserted.
    pub stop_at_bad: bool,
    /// Expand each BFS layer on the rayon pool.
    pub parallel: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        Self {
            state_bound: DEFAULT_STATE_BOUND,
            stop_at_bad: false,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplorationStats {
    pub mode: Mode,
    pub states_reached: usize,
    /// Edges before totalization.
    pub edges: usize,
    /// Expanded states without successors.
    pub deadlocks: usize,
    /// Largest BFS layer, i.e. the peak of the unexplored set at layer
    /// boundaries.
    pub frontier_peak: usize,
    #[serde(skip)]
    pub duration: Duration,
    pub bad_reached: bool,
}

/// A state space that the engine can explore.
pub(crate) trait TransitionSystem: Sync {
    type State: Clone + Eq + Hash + Ord + Send + Sync;

    fn props(&self) -> Vec<AtomicProp>;
    fn initial(&self) -> Result<Vec<Self::State>>;
    fn successors(&self, state: &Self::State) -> Result<Vec<(String, Self::State)>>;
    /// Propositions holding in a state, `init` excluded.
    fn labels(&self, state: &Self::State) -> Result<BTreeSet<String>>;
}

pub(crate) fn run_bfs<T: TransitionSystem>(
    system: &T,
    mode: Mode,
    options: &ExploreOptions,
) -> Result<(KripkeStructure<T::State>, ExplorationStats)> {
    let started = Instant::now();
    let mut structure = KripkeStructure::new(system.props())?;
    let mut stats = ExplorationStats {
        mode,
        states_reached: 0,
        edges: 0,
        deadlocks: 0,
        frontier_peak: 0,
        duration: Duration::ZERO,
        bad_reached: false,
    };
    let finish = |structure: KripkeStructure<T::State>, mut stats: ExplorationStats| {
        stats.states_reached = structure.len();
        stats.edges = structure.edge_count();
        stats.duration = started.elapsed();
        (structure, stats)
    };

    let mut initial = system.initial()?;
    initial.sort();
    initial.dedup();
    let mut layer = Vec::new();
    for state in initial {
        if structure.len() >= options.state_bound {
            return Err(bound_error(options.state_bound, layer.len(), finish(structure, stats).1));
        }
        let mut labels = system.labels(&state)?;
        labels.insert(INIT_LABEL.to_string());
        let bad = labels.contains(BAD_LABEL);
        let id = structure.add_state(state, &labels)?;
        structure.mark_initial(id)?;
        layer.push(id);
        if bad && options.stop_at_bad {
            stats.bad_reached = true;
            stats.frontier_peak = layer.len();
            return Ok(finish(structure, stats));
        }
    }
    stats.frontier_peak = layer.len();

    while !layer.is_empty() {
        let expand = |&id: &usize| -> Result<Vec<(String, T::State)>> {
            let payload = structure.payload(id).expect("layer ids are registered");
            let mut succ = system.successors(payload)?;
            succ.sort_by(|(a, s), (b, t)| s.cmp(t).then_with(|| a.cmp(b)));
            succ.dedup();
            Ok(succ)
        };
        let expanded: Vec<Result<Vec<(String, T::State)>>> = if options.parallel {
            layer.par_iter().map(expand).collect()
        } else {
            layer.iter().map(expand).collect()
        };

        let mut next = Vec::new();
        for (position, (&source, succ)) in layer.iter().zip(expanded).enumerate() {
            let succ = succ?;
            if succ.is_empty() {
                stats.deadlocks += 1;
            }
            for (action, target) in succ {
                let target_id = match structure.id_of(&target) {
                    Some(id) => id,
                    None => {
                        if structure.len() >= options.state_bound {
                            let frontier = layer.len() - position + next.len();
                            return Err(bound_error(options.state_bound, frontier, finish(structure, stats).1));
                        }
                        let labels = system.labels(&target)?;
                        let bad = labels.contains(BAD_LABEL);
                        let id = structure.add_state(target, &labels)?;
                        next.push(id);
                        if bad && options.stop_at_bad {
                            structure.add_edge(source, &action, id)?;
                            stats.bad_reached = true;
                            stats.frontier_peak = stats.frontier_peak.max(next.len());
                            return Ok(finish(structure, stats));
                        }
                        id
                    }
                };
                structure.add_edge(source, &action, target_id)?;
            }
        }
        stats.frontier_peak = stats.frontier_peak.max(next.len());
        layer = next;
    }

    if structure.has_prop(BAD_LABEL) {
        stats.bad_reached = !structure.states_with_label(BAD_LABEL)?.is_empty();
    }
    Ok(finish(structure, stats))
}

fn bound_error(bound: usize, frontier: usize, stats: ExplorationStats) -> Error {
    Error::BoundExceeded {
        bound,
        frontier,
        stats: Box::new(stats),
    }
}

/// A structure built in one of the three modes.
#[derive(Debug, Clone)]
pub enum Model {
    Full(KripkeStructure<GlobalState>),
    Quotient(QuotientStructure),
    Counter(KripkeStructure<CounterState>),
}

impl Model {
    pub fn mode(&self) -> Mode {
        match self {
            Model::Full(_) => Mode::Full,
            Model::Quotient(_) => Mode::Quotient,
            Model::Counter(_) => Mode::Counter,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Model::Full(k) => k.len(),
            Model::Quotient(q) => q.structure.len(),
            Model::Counter(k) => k.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the structure for `mode`. Quotients use the full symmetric group.
pub fn build_model(program: &Program, mode: Mode, options: &ExploreOptions) -> Result<(Model, ExplorationStats)> {
    match mode {
        Mode::Full => run_bfs(&FullSystem { program }, Mode::Full, options).map(|(k, s)| (Model::Full(k), s)),
        Mode::Quotient => build_quotient_with(program, PermGroup::full_symmetric(program.n), options)
            .map(|(q, s)| (Model::Quotient(q), s)),
        Mode::Counter => build_counter_with(program, options).map(|(k, s)| (Model::Counter(k), s)),
    }
}

/// The states reached, in the representation of the mode that found them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachedSet {
    Concrete(Vec<GlobalState>),
    Counter(Vec<CounterState>),
}

impl ReachedSet {
    pub fn len(&self) -> usize {
        match self {
            ReachedSet::Concrete(v) => v.len(),
            ReachedSet::Counter(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn reach(program: &Program, mode: Mode, state_bound: usize, stop_at_bad: bool) -> Result<(ReachedSet, ExplorationStats)> {
    let options = ExploreOptions {
        state_bound,
        stop_at_bad,
        ..ExploreOptions::default()
    };
    reach_with(program, mode, &options)
}

pub fn reach_with(program: &Program, mode: Mode, options: &ExploreOptions) -> Result<(ReachedSet, ExplorationStats)> {
    let (model, stats) = build_model(program, mode, options)?;
    let reached = match model {
        Model::Full(k) => ReachedSet::Concrete(k.payloads().to_vec()),
        Model::Quotient(q) => ReachedSet::Concrete(q.structure.payloads().to_vec()),
        Model::Counter(k) => ReachedSet::Counter(k.payloads().to_vec()),
    };
    Ok((reached, stats))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub full: ExplorationStats,
    pub quotient: ExplorationStats,
    /// `None` when the program is outside the counter abstraction's scope.
    pub counter: Option<ExplorationStats>,
    pub counter_unsupported: Option<String>,
    /// Full states per quotient state.
    pub reduction_factor: f64,
}

/// Runs every applicable mode and cross-checks the counts.
pub fn compare_modes(program: &Program, options: &ExploreOptions) -> Result<ComparisonReport> {
    let (_, full) = build_model(program, Mode::Full, options)?;
    let (_, quotient) = build_model(program, Mode::Quotient, options)?;
    let (counter, counter_unsupported) = match build_model(program, Mode::Counter, options) {
        Ok((_, stats)) => (Some(stats), None),
        Err(e @ (Error::UnsupportedAbstraction(_) | Error::PidShared(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    if let Some(c) = &counter {
        if c.states_reached != quotient.states_reached {
            return Err(Error::ModeMismatch(format!(
                "{} counter states vs {} quotient states",
                c.states_reached, quotient.states_reached
            )));
        }
    }
    let reduction_factor = full.states_reached as f64 / quotient.states_reached as f64;
    Ok(ComparisonReport {
        full,
        quotient,
        counter,
        counter_unsupported,
        reduction_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::builtin_example;

    #[test]
    fn mode_parsing() {
        assert_eq!("quotient".parse::<Mode>().unwrap(), Mode::Quotient);
        assert!("sym".parse::<Mode>().is_err());
    }

    #[test]
    fn mutex_two_full() {
        let p = builtin_example("mutex", 2).unwrap();
        let (reached, stats) = reach(&p, Mode::Full, 1000, false).unwrap();
        assert_eq!(reached.len(), 8);
        assert_eq!(stats.states_reached, 8);
        assert!(!stats.bad_reached);
        assert_eq!(stats.deadlocks, 0);
    }

    #[test]
    fn stop_at_bad_halts_early() {
        let p = builtin_example("broken-mutex", 3).unwrap();
        for mode in Mode::ALL {
            let (_, stats) = reach(&p, mode, 1000, true).unwrap();
            assert!(stats.bad_reached, "{mode}");
            let (_, all) = reach(&p, mode, 1000, false).unwrap();
            assert!(stats.states_reached < all.states_reached, "{mode}");
        }
    }

    #[test]
    fn bound_error_reports_partial_stats() {
        let p = builtin_example("mutex", 4).unwrap();
        match reach(&p, Mode::Full, 10, false) {
            Err(Error::BoundExceeded { bound, frontier, stats }) => {
                assert_eq!(bound, 10);
                assert!(frontier > 0);
                assert_eq!(stats.states_reached, 10);
            }
            other => panic!("expected bound error, got {other:?}"),
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = builtin_example("mutex", 5).unwrap();
        let seq = ExploreOptions::default();
        let par = ExploreOptions {
            parallel: true,
            ..ExploreOptions::default()
        };
        for mode in Mode::ALL {
            let (a, sa) = build_model(&p, mode, &seq).unwrap();
            let (b, sb) = build_model(&p, mode, &par).unwrap();
            assert_eq!(sa.states_reached, sb.states_reached);
            assert_eq!(sa.frontier_peak, sb.frontier_peak);
            match (a, b) {
                (Model::Full(x), Model::Full(y)) => {
                    assert_eq!(x.payloads(), y.payloads());
                    assert!(x.edges().eq(y.edges()));
                }
                (Model::Quotient(x), Model::Quotient(y)) => {
                    assert_eq!(x.structure.payloads(), y.structure.payloads());
                    assert!(x.structure.edges().eq(y.structure.edges()));
                }
                (Model::Counter(x), Model::Counter(y)) => {
                    assert_eq!(x.payloads(), y.payloads());
                    assert!(x.edges().eq(y.edges()));
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn compare_trivial_and_allocator() {
        let p = builtin_example("mutex", 1).unwrap();
        let report = compare_modes(&p, &ExploreOptions::default()).unwrap();
        assert_eq!(report.reduction_factor, 1.0);

        let a = builtin_example("allocator", 3).unwrap();
        let report = compare_modes(&a, &ExploreOptions::default()).unwrap();
        assert!(report.counter.is_none());
        assert!(report.counter_unsupported.is_some());
        assert!(report.full.states_reached > report.quotient.states_reached);
    }
}
