//! Guarded-command programs over `n` identical processes.
//!
//! A program has shared variables (`bool` or `pid`), a program counter per
//! process, and process-local booleans. Each transition fires one enabled
//! command of one process atomically (guard test plus all updates).
//!
//! Guards and labels are restricted to atoms that cannot single out a process
//! by index, so every permutation of process indices is an automorphism of the
//! resulting structure. The two asymmetric atoms ([`Guard::PidIsIndex`],
//! [`LabelExpr::ProcessAt`]) exist only for test harnesses; the parser never
//! produces them.

mod builtins;
pub(crate) mod parser;

use std::collections::BTreeSet;
use std::fmt;

use crate::explore::{self, ExploreOptions, Mode, TransitionSystem};
use crate::error::Result;
use crate::kripke::{AtomicProp, KripkeStructure};

pub use builtins::{builtin_example, builtin_source, BUILTIN_NAMES};
pub use parser::parse_program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Bool,
    Pid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
}

/// A process reference stored in a pid variable. `None` orders after every
/// index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcRef {
    Index(u32),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Pid(ProcRef),
}

/// One process's local state: its pc (position in the declared pc domain) and
/// its local booleans, local `j` stored as bit `j`.
///
/// The derived order (pc first, then `vars` as a binary number) is the fixed
/// total order used for canonical representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalRecord {
    pub pc: u16,
    pub vars: u64,
}

impl LocalRecord {
    pub fn at(pc: u16) -> Self {
        Self { pc, vars: 0 }
    }

    pub fn get(&self, local: usize) -> bool {
        self.vars >> local & 1 == 1
    }

    pub fn set(&mut self, local: usize, value: bool) {
        if value {
            self.vars |= 1 << local;
        } else {
            self.vars &= !(1 << local);
        }
    }
}

/// A configuration of the whole system.
///
/// Canonical byte encoding, whose lexicographic order coincides with the
/// derived `Ord`:
/// - each shared value in declaration order: a bool is one byte (0 or 1); a
///   pid is a big-endian `u32`, with `none` encoded as `0xFFFF_FFFF`
/// - then each local record in process order: pc as big-endian `u16`, then
///   `vars` as big-endian `u64`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState {
    pub shared: Vec<Value>,
    pub locals: Vec<LocalRecord>,
}

impl GlobalState {
    pub fn n(&self) -> usize {
        self.locals.len()
    }

    pub fn has_pid_values(&self) -> bool {
        self.shared.iter().any(|v| matches!(v, Value::Pid(_)))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.shared.len() * 4 + self.locals.len() * 10);
        for value in &self.shared {
            match value {
                Value::Bool(b) => bytes.push(u8::from(*b)),
                Value::Pid(ProcRef::Index(i)) => bytes.extend_from_slice(&i.to_be_bytes()),
                Value::Pid(ProcRef::None) => bytes.extend_from_slice(&u32::MAX.to_be_bytes()),
            }
        }
        for local in &self.locals {
            bytes.extend_from_slice(&local.pc.to_be_bytes());
            bytes.extend_from_slice(&local.vars.to_be_bytes());
        }
        bytes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRef {
    Shared(usize),
    Local(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    False,
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
    /// A bool variable (shared or self-local) has the given value.
    BoolIs { var: VarRef, value: bool },
    /// Shared pid variable holds the executing process.
    PidIsSelf(usize),
    PidIsNone(usize),
    /// `all_others(pc != X)`
    NoOtherAt(u16),
    /// `exists_other(pc == X)`
    SomeOtherAt(u16),
    /// Shared pid variable equals a fixed process index. Breaks symmetry;
    /// never produced by the parser.
    PidIsIndex(usize, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Const(bool),
    /// `*`: both values, one successor each.
    Nondet,
    SelfId,
    NoProc,
    Copy(VarRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub target: VarRef,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedCommand {
    pub from_pc: u16,
    pub to_pc: u16,
    pub guard: Guard,
    pub updates: Vec<Update>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelExpr {
    True,
    False,
    Not(Box<LabelExpr>),
    And(Box<LabelExpr>, Box<LabelExpr>),
    Or(Box<LabelExpr>, Box<LabelExpr>),
    SharedBool { var: usize, value: bool },
    SharedPidNone(usize),
    /// `count(pc = X) >= k`
    CountAtLeast { pc: u16, k: u32 },
    /// Process `process` is at `pc`. Breaks symmetry; never produced by the
    /// parser.
    ProcessAt { process: u32, pc: u16 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDef {
    pub name: String,
    pub expr: LabelExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub n: usize,
    pub shared: Vec<VarDecl>,
    pub pcs: Vec<String>,
    pub locals: Vec<String>,
    pub commands: Vec<GuardedCommand>,
    pub labels: Vec<LabelDef>,
    pub init_shared: Vec<Value>,
    pub init_local: LocalRecord,
}

/// Name of the label carried by initial states.
pub const INIT_LABEL: &str = "init";
/// Label whose reachability `stop_at_bad` watches for.
pub const BAD_LABEL: &str = "bad";

/// What a firing process can observe about the other processes.
pub(crate) trait OtherProcs {
    fn any_other_at(&self, pc: u16) -> bool;
}

struct ConcreteOthers<'a> {
    locals: &'a [LocalRecord],
    me: usize,
}

impl OtherProcs for ConcreteOthers<'_> {
    fn any_other_at(&self, pc: u16) -> bool {
        self.locals
            .iter()
            .enumerate()
            .any(|(j, l)| j != self.me && l.pc == pc)
    }
}

/// Population view used by labels: how many processes sit at each pc.
pub(crate) trait Population {
    fn count_at(&self, pc: u16) -> u32;
    /// Only meaningful for concrete states.
    fn process_at(&self, process: u32, pc: u16) -> Option<bool>;
}

struct Processes<'a>(&'a [LocalRecord]);

impl Population for Processes<'_> {
    fn count_at(&self, pc: u16) -> u32 {
        self.0.iter().filter(|l| l.pc == pc).count() as u32
    }

    fn process_at(&self, process: u32, pc: u16) -> Option<bool> {
        Some(self.0.get(process as usize).is_some_and(|l| l.pc == pc))
    }
}

impl Program {
    pub fn has_pid_shared(&self) -> bool {
        self.shared.iter().any(|d| d.ty == VarType::Pid)
    }

    pub fn pc_index(&self, name: &str) -> Option<u16> {
        self.pcs.iter().position(|p| p == name).map(|i| i as u16)
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState {
            shared: self.init_shared.clone(),
            locals: vec![self.init_local; self.n],
        }
    }

    /// Always a single state; a set for interface uniformity.
    pub fn initial_states(&self) -> BTreeSet<GlobalState> {
        BTreeSet::from([self.initial_state()])
    }

    /// Atomic propositions of every structure built from this program: `init`,
    /// the program's labels, one literal per shared bool, and
    /// `count_<pc>_ge_<k>` for every pc and `1 <= k <= n`.
    pub fn atomic_props(&self) -> Vec<AtomicProp> {
        let mut props = vec![AtomicProp::designated(INIT_LABEL)];
        props.extend(self.labels.iter().map(|l| AtomicProp::designated(&l.name)));
        props.extend(
            self.shared
                .iter()
                .filter(|d| d.ty == VarType::Bool)
                .map(|d| AtomicProp::shared_literal(&d.name)),
        );
        for pc in &self.pcs {
            for k in 1..=self.n as u32 {
                props.push(AtomicProp::count_threshold(pc, k));
            }
        }
        props
    }

    /// Interleaving successors of `state`, in process-then-command order.
    /// Action labels are `"<process>/c<command>"`.
    pub fn successors(&self, state: &GlobalState) -> Vec<(String, GlobalState)> {
        let mut result = Vec::new();
        for (i, me) in state.locals.iter().enumerate() {
            let others = ConcreteOthers {
                locals: &state.locals,
                me: i,
            };
            for (c, cmd) in self.commands.iter().enumerate() {
                if cmd.from_pc != me.pc {
                    continue;
                }
                if !self.guard_holds(&cmd.guard, &state.shared, me, Some(i as u32), &others) {
                    continue;
                }
                for (shared, local) in self.fire(cmd, &state.shared, me, Some(i as u32)) {
                    let mut locals = state.locals.clone();
                    locals[i] = local;
                    result.push((format!("{i}/c{c}"), GlobalState { shared, locals }));
                }
            }
        }
        result
    }

    pub(crate) fn guard_holds(
        &self,
        guard: &Guard,
        shared: &[Value],
        me: &LocalRecord,
        self_id: Option<u32>,
        others: &dyn OtherProcs,
    ) -> bool {
        let eval = |g: &Guard| self.guard_holds(g, shared, me, self_id, others);
        match guard {
            Guard::True => true,
            Guard::False => false,
            Guard::Not(g) => !eval(g),
            Guard::And(a, b) => eval(a) && eval(b),
            Guard::Or(a, b) => eval(a) || eval(b),
            Guard::BoolIs { var, value } => read(*var, shared, me) == Value::Bool(*value),
            Guard::PidIsSelf(v) => match (shared[*v], self_id) {
                (Value::Pid(ProcRef::Index(p)), Some(me)) => p == me,
                _ => false,
            },
            Guard::PidIsNone(v) => shared[*v] == Value::Pid(ProcRef::None),
            Guard::NoOtherAt(pc) => !others.any_other_at(*pc),
            Guard::SomeOtherAt(pc) => others.any_other_at(*pc),
            Guard::PidIsIndex(v, idx) => shared[*v] == Value::Pid(ProcRef::Index(*idx)),
        }
    }

    /// All outcomes of one command application: one per resolution of the
    /// `*` assignments, in binary-counting order. Right-hand sides read the
    /// pre-state.
    pub(crate) fn fire(
        &self,
        cmd: &GuardedCommand,
        shared: &[Value],
        me: &LocalRecord,
        self_id: Option<u32>,
    ) -> Vec<(Vec<Value>, LocalRecord)> {
        let stars = cmd.updates.iter().filter(|u| u.rhs == Rhs::Nondet).count();
        let mut out = Vec::with_capacity(1 << stars);
        for choice in 0u64..(1 << stars) {
            let mut next_shared = shared.to_vec();
            let mut next_local = *me;
            next_local.pc = cmd.to_pc;
            let mut star = 0;
            for update in &cmd.updates {
                let value = match &update.rhs {
                    Rhs::Const(b) => Value::Bool(*b),
                    Rhs::Nondet => {
                        let bit = choice >> star & 1 == 1;
                        star += 1;
                        Value::Bool(bit)
                    }
                    Rhs::SelfId => Value::Pid(self_id.map_or(ProcRef::None, ProcRef::Index)),
                    Rhs::NoProc => Value::Pid(ProcRef::None),
                    Rhs::Copy(src) => read(*src, shared, me),
                };
                match update.target {
                    VarRef::Shared(v) => next_shared[v] = value,
                    VarRef::Local(l) => next_local.set(l, value == Value::Bool(true)),
                }
            }
            out.push((next_shared, next_local));
        }
        out
    }

    /// The program's own labels (the `label` definitions) holding in `state`.
    pub fn labeling(&self, state: &GlobalState) -> BTreeSet<String> {
        self.labels
            .iter()
            .filter(|l| self.label_holds(&l.expr, &state.shared, &Processes(&state.locals)))
            .map(|l| l.name.clone())
            .collect()
    }

    /// Every atomic proposition except `init` holding in `state`.
    pub fn state_props(&self, state: &GlobalState) -> BTreeSet<String> {
        self.props_for(&state.shared, &Processes(&state.locals))
    }

    pub(crate) fn props_for(&self, shared: &[Value], population: &dyn Population) -> BTreeSet<String> {
        let mut props: BTreeSet<String> = self
            .labels
            .iter()
            .filter(|l| self.label_holds(&l.expr, shared, population))
            .map(|l| l.name.clone())
            .collect();
        for (decl, value) in self.shared.iter().zip(shared) {
            if *value == Value::Bool(true) {
                props.insert(decl.name.clone());
            }
        }
        for (pc, name) in self.pcs.iter().enumerate() {
            let count = population.count_at(pc as u16);
            for k in 1..=count.min(self.n as u32) {
                props.insert(crate::kripke::count_prop_name(name, k));
            }
        }
        props
    }

    pub(crate) fn label_holds(&self, expr: &LabelExpr, shared: &[Value], population: &dyn Population) -> bool {
        let eval = |e: &LabelExpr| self.label_holds(e, shared, population);
        match expr {
            LabelExpr::True => true,
            LabelExpr::False => false,
            LabelExpr::Not(e) => !eval(e),
            LabelExpr::And(a, b) => eval(a) && eval(b),
            LabelExpr::Or(a, b) => eval(a) || eval(b),
            LabelExpr::SharedBool { var, value } => shared[*var] == Value::Bool(*value),
            LabelExpr::SharedPidNone(var) => shared[*var] == Value::Pid(ProcRef::None),
            LabelExpr::CountAtLeast { pc, k } => population.count_at(*pc) >= *k,
            LabelExpr::ProcessAt { process, pc } => population.process_at(*process, *pc).unwrap_or(false),
        }
    }

    /// True if some guard or label uses an index-specific atom.
    pub fn uses_asymmetric_atoms(&self) -> bool {
        fn guard(g: &Guard) -> bool {
            match g {
                Guard::PidIsIndex(..) => true,
                Guard::Not(a) => guard(a),
                Guard::And(a, b) | Guard::Or(a, b) => guard(a) || guard(b),
                _ => false,
            }
        }
        fn label(e: &LabelExpr) -> bool {
            match e {
                LabelExpr::ProcessAt { .. } => true,
                LabelExpr::Not(a) => label(a),
                LabelExpr::And(a, b) | LabelExpr::Or(a, b) => label(a) || label(b),
                _ => false,
            }
        }
        self.commands.iter().any(|c| guard(&c.guard)) || self.labels.iter().any(|l| label(&l.expr))
    }

    pub fn render_local(&self, local: &LocalRecord) -> String {
        let pc = self.pcs.get(local.pc as usize).map_or("?", String::as_str);
        if self.locals.is_empty() {
            return pc.to_string();
        }
        let vars: Vec<String> = self
            .locals
            .iter()
            .enumerate()
            .map(|(j, name)| format!("{name}={}", u8::from(local.get(j))))
            .collect();
        format!("{pc}({})", vars.join(","))
    }

    pub fn render_value(&self, value: &Value) -> String {
        match value {
            Value::Bool(b) => u8::from(*b).to_string(),
            Value::Pid(ProcRef::Index(i)) => i.to_string(),
            Value::Pid(ProcRef::None) => "none".to_string(),
        }
    }

    /// Human-readable form, e.g. `grant=0 | [exec, ready]` or `[T, W]`.
    pub fn render_state(&self, state: &GlobalState) -> String {
        let locals: Vec<String> = state.locals.iter().map(|l| self.render_local(l)).collect();
        let locals = format!("[{}]", locals.join(", "));
        if self.shared.is_empty() {
            return locals;
        }
        let shared: Vec<String> = self
            .shared
            .iter()
            .zip(&state.shared)
            .map(|(d, v)| format!("{}={}", d.name, self.render_value(v)))
            .collect();
        format!("{} | {locals}", shared.join(", "))
    }
}

fn read(var: VarRef, shared: &[Value], me: &LocalRecord) -> Value {
    match var {
        VarRef::Shared(v) => shared[v],
        VarRef::Local(l) => Value::Bool(me.get(l)),
    }
}

impl fmt::Display for ProcRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcRef::Index(i) => write!(f, "{i}"),
            ProcRef::None => f.write_str("none"),
        }
    }
}

/// The unreduced structure: every concrete reachable state.
pub(crate) struct FullSystem<'a> {
    pub program: &'a Program,
}

impl TransitionSystem for FullSystem<'_> {
    type State = GlobalState;

    fn props(&self) -> Vec<AtomicProp> {
        self.program.atomic_props()
    }

    fn initial(&self) -> Result<Vec<GlobalState>> {
        Ok(self.program.initial_states().into_iter().collect())
    }

    fn successors(&self, state: &GlobalState) -> Result<Vec<(String, GlobalState)>> {
        Ok(self.program.successors(state))
    }

    fn labels(&self, state: &GlobalState) -> Result<BTreeSet<String>> {
        Ok(self.program.state_props(state))
    }
}

/// BFS over concrete states. The result is not totalized.
pub fn build_full_structure(program: &Program, state_bound: usize) -> Result<KripkeStructure<GlobalState>> {
    let options = ExploreOptions {
        state_bound,
        ..ExploreOptions::default()
    };
    explore::run_bfs(&FullSystem { program }, Mode::Full, &options).map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn locals(program: &Program, pcs: &[&str]) -> Vec<LocalRecord> {
        pcs.iter()
            .map(|p| LocalRecord::at(program.pc_index(p).unwrap()))
            .collect()
    }

    fn state(program: &Program, pcs: &[&str]) -> GlobalState {
        GlobalState {
            shared: program.init_shared.clone(),
            locals: locals(program, pcs),
        }
    }

    #[test]
    fn mutex_initial_state() {
        let p = builtin_example("mutex", 3).unwrap();
        let init = p.initial_states();
        assert_eq!(init.len(), 1);
        assert_eq!(init.into_iter().next().unwrap(), state(&p, &["T", "T", "T"]));
    }

    #[test]
    fn mutex_successors_from_start() {
        let p = builtin_example("mutex", 2).unwrap();
        let succ = p.successors(&state(&p, &["T", "T"]));
        assert_eq!(
            succ,
            vec![
                ("0/c0".to_string(), state(&p, &["W", "T"])),
                ("1/c0".to_string(), state(&p, &["T", "W"])),
            ]
        );
    }

    #[test]
    fn no_enabled_guard_means_no_successors() {
        let p = parse_program("processes 2; pc {A, B}; init pc=A; A -> B : exists_other(pc == B) /;").unwrap();
        assert!(p.successors(&p.initial_state()).is_empty());
    }

    #[test]
    fn nondet_assignment_branches() {
        let p = parse_program("processes 1; shared x : bool; pc {A, B}; init pc=A; A -> B : true / x := *;").unwrap();
        let succ = p.successors(&p.initial_state());
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0].1.locals, succ[1].1.locals);
        assert_eq!(succ[0].1.shared, vec![Value::Bool(false)]);
        assert_eq!(succ[1].1.shared, vec![Value::Bool(true)]);
    }

    #[test]
    fn updates_read_the_pre_state() {
        let p = parse_program(
            "processes 1; shared x : bool; shared y : bool; pc {A}; init pc=A, x=1; A -> A : true / x := y, y := x;",
        )
        .unwrap();
        let succ = p.successors(&p.initial_state());
        assert_eq!(succ[0].1.shared, vec![Value::Bool(false), Value::Bool(true)]);
    }

    #[test]
    fn allocator_grant_protocol() {
        let p = builtin_example("allocator", 2).unwrap();
        let mut s = state(&p, &["req", "req"]);
        let succ = p.successors(&s);
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0].1.shared, vec![Value::Pid(ProcRef::Index(0))]);
        s.shared = vec![Value::Pid(ProcRef::Index(0))];
        assert!(p.successors(&s).is_empty());
    }

    #[test]
    fn labeling_counts() {
        let p = builtin_example("mutex", 3).unwrap();
        assert!(p.labeling(&state(&p, &["C", "C", "T"])).contains("bad"));
        assert!(!p.labeling(&state(&p, &["T", "T", "T"])).contains("bad"));
        let props = p.state_props(&state(&p, &["C", "C", "T"]));
        assert!(props.contains("count_C_ge_2"));
        assert!(!props.contains("count_C_ge_3"));
    }

    #[test]
    fn local_record_bits() {
        let mut r = LocalRecord::at(1);
        r.set(2, true);
        assert!(r.get(2) && !r.get(0));
        assert_eq!(r.vars, 4);
        r.set(2, false);
        assert_eq!(r.vars, 0);
    }

    #[test]
    fn encoding_layout() {
        let s = GlobalState {
            shared: vec![Value::Bool(true), Value::Pid(ProcRef::None)],
            locals: vec![LocalRecord { pc: 2, vars: 1 }],
        };
        assert_eq!(
            s.encode(),
            vec![1, 0xff, 0xff, 0xff, 0xff, 0, 2, 0, 0, 0, 0, 0, 0, 0, 1]
        );
    }

    #[test]
    fn full_structure_small_cases() {
        let p = builtin_example("mutex", 2).unwrap();
        let k = build_full_structure(&p, 100).unwrap();
        assert_eq!(k.len(), 8);
        assert_eq!(k.init().len(), 1);

        let trivial = parse_program("processes 1; pc {A}; init pc=A;").unwrap();
        let k = build_full_structure(&trivial, 10).unwrap();
        assert_eq!((k.len(), k.edge_count()), (1, 0));

        assert!(matches!(
            build_full_structure(&p, 3),
            Err(crate::Error::BoundExceeded { bound: 3, .. })
        ));
    }

    #[test]
    fn render() {
        let p = builtin_example("allocator", 2).unwrap();
        let mut s = state(&p, &["exec", "ready"]);
        s.shared = vec![Value::Pid(ProcRef::Index(0))];
        assert_eq!(p.render_state(&s), "grant=0 | [exec, ready]");
    }
}
