//! Explicit Kripke structures with action-labeled edges.
//!
//! States are keyed by payload: adding an equal payload twice yields the same
//! id. Ids are dense and assigned in insertion order, so a builder that
//! inserts deterministically gets deterministic numbering.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

pub type StateId = usize;

/// Sets of states are kept ordered so iteration (and everything derived from
/// it) is deterministic.
pub type StateSet = BTreeSet<StateId>;

/// Action label used for the self-loops added by [`KripkeStructure::totalize`].
pub const STUTTER: &str = "stutter";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PropKind {
    SharedLiteral,
    CountThreshold { local: String, k: u32 },
    DesignatedLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AtomicProp {
    pub name: String,
    pub kind: PropKind,
}

impl AtomicProp {
    pub fn designated(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: PropKind::DesignatedLabel,
        }
    }

    pub fn shared_literal(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: PropKind::SharedLiteral,
        }
    }

    /// `#(pc = local) >= k`, named `count_<local>_ge_<k>`.
    pub fn count_threshold(local: impl Into<String>, k: u32) -> Self {
        let local = local.into();
        Self {
            name: count_prop_name(&local, k),
            kind: PropKind::CountThreshold { local, k },
        }
    }
}

pub fn count_prop_name(local: &str, k: u32) -> String {
    format!("count_{local}_ge_{k}")
}

/// A finite path through a structure, optionally closing into a lasso.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub states: Vec<StateId>,
    /// If set, the last state has an edge back to `states[lasso]`.
    pub lasso: Option<usize>,
}

impl Path {
    pub fn finite(states: Vec<StateId>) -> Self {
        Self {
            states,
            lasso: None,
        }
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.states.len() <= 1
    }

    pub fn is_valid_in<P>(&self, structure: &KripkeStructure<P>) -> bool
    where
        P: Clone + Eq + Hash,
    {
        if self.states.iter().any(|&s| s >= structure.len()) {
            return false;
        }
        let steps_ok = self
            .states
            .windows(2)
            .all(|w| structure.has_edge_between(w[0], w[1]));
        let lasso_ok = match (self.lasso, self.states.last()) {
            (None, _) => true,
            (Some(j), Some(&last)) => j < self.states.len() && structure.has_edge_between(last, self.states[j]),
            (Some(_), None) => false,
        };
        steps_ok && lasso_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TotalizePolicy {
    SelfLoop,
    Reject,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeadlockReport {
    pub deadlocked: Vec<StateId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge<'a> {
    pub source: StateId,
    pub action: &'a str,
    pub target: StateId,
}

#[derive(Debug, Clone)]
pub struct DotOptions {
    pub graph_name: String,
    /// Append the atomic propositions holding in a state to its node label.
    pub show_props: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self {
            graph_name: "M".to_string(),
            show_props: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KripkeStructure<P> {
    states: Vec<P>,
    index: HashMap<P, StateId>,
    init: StateSet,
    props: Vec<AtomicProp>,
    prop_index: HashMap<String, usize>,
    labels: Vec<BTreeSet<usize>>,
    actions: Vec<String>,
    action_index: HashMap<String, usize>,
    out: Vec<Vec<(usize, StateId)>>,
    inc: Vec<Vec<(StateId, usize)>>,
    edge_count: usize,
}

impl<P: Clone + Eq + Hash> KripkeStructure<P> {
    pub fn new(props: impl IntoIterator<Item = AtomicProp>) -> Result<Self> {
        let mut structure = Self {
            states: Vec::new(),
            index: HashMap::new(),
            init: StateSet::new(),
            props: Vec::new(),
            prop_index: HashMap::new(),
            labels: Vec::new(),
            actions: Vec::new(),
            action_index: HashMap::new(),
            out: Vec::new(),
            inc: Vec::new(),
            edge_count: 0,
        };
        for prop in props {
            if structure.prop_index.contains_key(&prop.name) {
                return Err(Error::DuplicateProp(prop.name));
            }
            structure
                .prop_index
                .insert(prop.name.clone(), structure.props.len());
            structure.props.push(prop);
        }
        Ok(structure)
    }

    /// Registers `payload`, returning the existing id if it is already present
    /// (labels of an existing state are left untouched).
    pub fn add_state<I, S>(&mut self, payload: P, labels: I) -> Result<StateId>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut label_ids = BTreeSet::new();
        for label in labels {
            let label = label.as_ref();
            let id = *self
                .prop_index
                .get(label)
                .ok_or_else(|| Error::SchemaLabel(label.to_string()))?;
            label_ids.insert(id);
        }
        if let Some(&id) = self.index.get(&payload) {
            return Ok(id);
        }
        let id = self.states.len();
        self.index.insert(payload.clone(), id);
        self.states.push(payload);
        self.labels.push(label_ids);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        Ok(id)
    }

    pub fn mark_initial(&mut self, state: StateId) -> Result<()> {
        self.check_id(state)?;
        self.init.insert(state);
        Ok(())
    }

    /// Adds `source -action-> target`; returns false if the edge already existed.
    pub fn add_edge(&mut self, source: StateId, action: &str, target: StateId) -> Result<bool> {
        self.check_id(source)?;
        self.check_id(target)?;
        let action_id = match self.action_index.get(action) {
            Some(&a) => a,
            None => {
                let a = self.actions.len();
                self.actions.push(action.to_string());
                self.action_index.insert(action.to_string(), a);
                a
            }
        };
        if self.out[source].contains(&(action_id, target)) {
            return Ok(false);
        }
        self.out[source].push((action_id, target));
        self.inc[target].push((source, action_id));
        self.edge_count += 1;
        Ok(true)
    }

    /// Keeps only the edges for which `keep` returns true.
    pub fn retain_edges(&mut self, mut keep: impl FnMut(Edge<'_>) -> bool) {
        let actions = &self.actions;
        let mut removed = Vec::new();
        for (source, list) in self.out.iter_mut().enumerate() {
            list.retain(|&(a, target)| {
                let k = keep(Edge {
                    source,
                    action: &actions[a],
                    target,
                });
                if !k {
                    removed.push((source, a, target));
                }
                k
            });
        }
        for (source, a, target) in removed {
            self.inc[target].retain(|&e| e != (source, a));
            self.edge_count -= 1;
        }
    }

    fn check_id(&self, id: StateId) -> Result<()> {
        if id < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(id))
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn payload(&self, id: StateId) -> Option<&P> {
        self.states.get(id)
    }

    pub fn payloads(&self) -> &[P] {
        &self.states
    }

    pub fn id_of(&self, payload: &P) -> Option<StateId> {
        self.index.get(payload).copied()
    }

    pub fn init(&self) -> &StateSet {
        &self.init
    }

    pub fn all_states(&self) -> StateSet {
        (0..self.states.len()).collect()
    }

    pub fn props(&self) -> &[AtomicProp] {
        &self.props
    }

    pub fn has_prop(&self, name: &str) -> bool {
        self.prop_index.contains_key(name)
    }

    /// Names of the propositions holding in `state`, in declaration order.
    pub fn labels_of(&self, state: StateId) -> Vec<&str> {
        self.labels
            .get(state)
            .map(|ids| ids.iter().map(|&i| self.props[i].name.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn label_set(&self, state: StateId) -> BTreeSet<String> {
        self.labels_of(state).into_iter().map(str::to_string).collect()
    }

    pub fn has_label(&self, state: StateId, name: &str) -> bool {
        match (self.prop_index.get(name), self.labels.get(state)) {
            (Some(p), Some(ls)) => ls.contains(p),
            _ => false,
        }
    }

    pub fn states_with_label(&self, name: &str) -> Result<StateSet> {
        let p = *self
            .prop_index
            .get(name)
            .ok_or_else(|| Error::SchemaLabel(name.to_string()))?;
        Ok(self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, ls)| ls.contains(&p))
            .map(|(s, _)| s)
            .collect())
    }

    /// Outgoing `(action, target)` pairs in insertion order.
    pub fn successors(&self, state: StateId) -> impl Iterator<Item = (&str, StateId)> + '_ {
        self.out
            .get(state)
            .into_iter()
            .flatten()
            .map(move |&(a, t)| (self.actions[a].as_str(), t))
    }

    /// Incoming `(source, action)` pairs in insertion order.
    pub fn predecessors(&self, state: StateId) -> impl Iterator<Item = (StateId, &str)> + '_ {
        self.inc
            .get(state)
            .into_iter()
            .flatten()
            .map(move |&(s, a)| (s, self.actions[a].as_str()))
    }

    pub fn has_edge_between(&self, source: StateId, target: StateId) -> bool {
        self.out
            .get(source)
            .is_some_and(|list| list.iter().any(|&(_, t)| t == target))
    }

    /// All edges, grouped by source in id order, insertion order within a source.
    pub fn edges(&self) -> impl Iterator<Item = Edge<'_>> + '_ {
        self.out.iter().enumerate().flat_map(move |(source, list)| {
            list.iter().map(move |&(a, target)| Edge {
                source,
                action: &self.actions[a],
                target,
            })
        })
    }

    pub fn image(&self, set: &StateSet) -> StateSet {
        set.iter()
            .filter_map(|&s| self.out.get(s))
            .flat_map(|list| list.iter().map(|&(_, t)| t))
            .collect()
    }

    pub fn preimage(&self, set: &StateSet) -> StateSet {
        set.iter()
            .filter_map(|&t| self.inc.get(t))
            .flat_map(|list| list.iter().map(|&(s, _)| s))
            .collect()
    }

    pub fn out_degree(&self, state: StateId) -> Result<usize> {
        self.check_id(state)?;
        Ok(self.out[state].len())
    }

    pub fn in_degree(&self, state: StateId) -> Result<usize> {
        self.check_id(state)?;
        Ok(self.inc[state].len())
    }

    pub fn deadlocks(&self) -> Vec<StateId> {
        (0..self.states.len())
            .filter(|&s| self.out[s].is_empty())
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.out.iter().all(|list| !list.is_empty())
    }

    /// Makes the transition relation total. With [`TotalizePolicy::Reject`]
    /// the structure is left unchanged and any deadlock is an error.
    pub fn totalize(&mut self, policy: TotalizePolicy) -> Result<DeadlockReport> {
        let deadlocked = self.deadlocks();
        if deadlocked.is_empty() {
            return Ok(DeadlockReport::default());
        }
        match policy {
            TotalizePolicy::Reject => Err(Error::Deadlock { states: deadlocked }),
            TotalizePolicy::SelfLoop => {
                for &s in &deadlocked {
                    self.add_edge(s, STUTTER, s)?;
                }
                Ok(DeadlockReport { deadlocked })
            }
        }
    }

    /// Graphviz rendering with nodes in id order and edges sorted by
    /// `(source, target, action)`.
    pub fn export_dot(&self, options: &DotOptions, render: impl Fn(&P) -> String) -> String {
        let mut text = String::new();
        let _ = writeln!(text, "digraph \"{}\" {{", escape(&options.graph_name));
        for (id, payload) in self.states.iter().enumerate() {
            let mut label = render(payload);
            if options.show_props {
                let props = self.labels_of(id);
                if !props.is_empty() {
                    label.push_str("\\n");
                    label.push_str(&escape(&props.join(", ")));
                }
            }
            let shape = if self.init.contains(&id) {
                ", shape=doublecircle"
            } else {
                ""
            };
            let _ = writeln!(text, "  s{id} [label=\"{}\"{shape}];", escape_keep_newline(&label));
        }
        let mut edges: Vec<(StateId, StateId, &str)> =
            self.edges().map(|e| (e.source, e.target, e.action)).collect();
        edges.sort_unstable();
        for (s, t, a) in edges {
            let _ = writeln!(text, "  s{s} -> s{t} [label=\"{}\"];", escape(a));
        }
        text.push_str("}\n");
        text
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

fn escape_keep_newline(text: &str) -> String {
    text.replace('"', "\\\"")
}
