//! Process permutations, their action on global states, orbits and canonical
//! representatives.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::frontend::{GlobalState, ProcRef, Program, Value};

/// Default cap on explicitly enumerated groups and orbits.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// A bijection on `{0..n-1}`; `image(i)` is where process `i` moves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::NotAPermutation(map));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.map.swap(a, b);
        p
    }

    /// `i -> i + 1 mod n`.
    pub fn cycle(n: usize) -> Self {
        Self {
            map: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if self.degree() == n {
            Ok(())
        } else {
            Err(Error::DegreeMismatch {
                expected: n,
                found: self.degree(),
            })
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        other.check_degree(self.degree())?;
        Ok(Permutation {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            map[m] = i;
        }
        Permutation { map }
    }

    /// Moves process `i`'s record to slot `image(i)` and renames pid values
    /// accordingly; `none` and bools are fixed.
    pub fn apply(&self, state: &GlobalState) -> Result<GlobalState> {
        self.check_degree(state.n())?;
        let mut locals = state.locals.clone();
        for (i, local) in state.locals.iter().enumerate() {
            locals[self.map[i]] = *local;
        }
        let shared = state
            .shared
            .iter()
            .map(|v| match v {
                Value::Pid(ProcRef::Index(p)) => Value::Pid(ProcRef::Index(self.map[*p as usize] as u32)),
                other => *other,
            })
            .collect();
        Ok(GlobalState { shared, locals })
    }

    /// Renames the process index of an action label `"<i>/c<j>"`.
    pub fn remap_action(&self, action: &str) -> String {
        match action.split_once('/') {
            Some((proc, rest)) => match proc.parse::<usize>() {
                Ok(i) if i < self.map.len() => format!("{}/{rest}", self.map[i]),
                _ => action.to_string(),
            },
            None => action.to_string(),
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    FullSymmetric,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGroup {
    n: usize,
    generators: Vec<Permutation>,
    kind: GroupKind,
}

impl PermGroup {
    /// Sym(n), generated by the transposition (0 1) and the n-cycle.
    pub fn full_symmetric(n: usize) -> Self {
        let mut generators = Vec::new();
        if n >= 2 {
            generators.push(Permutation::transposition(n, 0, 1));
            let cycle = Permutation::cycle(n);
            if !generators.contains(&cycle) {
                generators.push(cycle);
            }
        }
        Self {
            n,
            generators,
            kind: GroupKind::FullSymmetric,
        }
    }

    pub fn generated(n: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            g.check_degree(n)?;
        }
        Ok(Self {
            n,
            generators,
            kind: GroupKind::Generated,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// All group elements, identity first, by closure under the generators.
    pub fn elements(&self, cap: usize) -> Result<Vec<Permutation>> {
        let identity = Permutation::identity(self.n);
        let mut seen = HashSet::from([identity.clone()]);
        let mut elements = vec![identity.clone()];
        let mut queue = VecDeque::from([identity]);
        while let Some(e) = queue.pop_front() {
            for g in &self.generators {
                let next = g.compose(&e)?;
                if seen.insert(next.clone()) {
                    if elements.len() >= cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    elements.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        Ok(elements)
    }

    /// Closure of `{state}` under the generators.
    pub fn orbit(&self, state: &GlobalState) -> Result<BTreeSet<GlobalState>> {
        self.orbit_capped(state, usize::MAX)
    }

    pub fn orbit_capped(&self, state: &GlobalState, cap: usize) -> Result<BTreeSet<GlobalState>> {
        if state.n() != self.n {
            return Err(Error::DegreeMismatch {
                expected: self.n,
                found: state.n(),
            });
        }
        let mut orbit = BTreeSet::from([state.clone()]);
        let mut queue = VecDeque::from([state.clone()]);
        while let Some(s) = queue.pop_front() {
            for g in &self.generators {
                let t = g.apply(&s)?;
                if !orbit.contains(&t) {
                    if orbit.len() >= cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    orbit.insert(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(orbit)
    }
}

/// Canonical representative under full symmetry for pid-free states: local
/// records sorted ascending.
pub fn rep_sort(state: &GlobalState) -> Result<GlobalState> {
    if state.has_pid_values() {
        return Err(Error::PidShared("rep_sort"));
    }
    let mut rep = state.clone();
    rep.locals.sort_unstable();
    Ok(rep)
}

/// Least element of the orbit in canonical order, with a permutation mapping
/// `state` onto it.
///
/// Full symmetric groups are handled greedily without enumeration: pid-named
/// processes take the lowest slots in order of first mention, the rest follow
/// sorted. Generated groups are enumerated (up to [`ENUMERATION_CAP`]).
pub fn rep_min(group: &PermGroup, state: &GlobalState) -> Result<(GlobalState, Permutation)> {
    if state.n() != group.n {
        return Err(Error::DegreeMismatch {
            expected: group.n,
            found: state.n(),
        });
    }
    match group.kind {
        GroupKind::FullSymmetric => Ok(rep_min_full(state)),
        GroupKind::Generated => rep_min_enumerated(&group.elements(ENUMERATION_CAP)?, state),
    }
}

fn rep_min_full(state: &GlobalState) -> (GlobalState, Permutation) {
    let n = state.n();
    let mut target: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for value in &state.shared {
        if let Value::Pid(ProcRef::Index(p)) = value {
            let p = *p as usize;
            if target[p].is_none() {
                target[p] = Some(next);
                next += 1;
            }
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|&i| target[i].is_none()).collect();
    rest.sort_by_key(|&i| (state.locals[i], i));
    for i in rest {
        target[i] = Some(next);
        next += 1;
    }
    let perm = Permutation {
        map: target.into_iter().map(|t| t.expect("every index assigned")).collect(),
    };
    let rep = perm.apply(state).expect("degree checked");
    (rep, perm)
}

fn rep_min_enumerated(elements: &[Permutation], state: &GlobalState) -> Result<(GlobalState, Permutation)> {
    let mut best: Option<(GlobalState, &Permutation)> = None;
    for g in elements {
        let image = g.apply(state)?;
        if best.as_ref().is_none_or(|(b, _)| image < *b) {
            best = Some((image, g));
        }
    }
    let (rep, g) = best.expect("a group contains the identity");
    Ok((rep, g.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepMode {
    Sort,
    MinOverGroup,
}

/// Representative function for one (program, group) pair; caches the
/// elements of generated groups.
#[derive(Debug, Clone)]
pub struct Canonicalizer {
    group: PermGroup,
    mode: RepMode,
    elements: Option<Vec<Permutation>>,
}

impl Canonicalizer {
    pub fn new(program: &Program, group: PermGroup) -> Result<Self> {
        if group.n != program.n {
            return Err(Error::DegreeMismatch {
                expected: program.n,
                found: group.n,
            });
        }
        let mode = if group.kind == GroupKind::FullSymmetric && !program.has_pid_shared() {
            RepMode::Sort
        } else {
            RepMode::MinOverGroup
        };
        let elements = match group.kind {
            GroupKind::Generated => Some(group.elements(ENUMERATION_CAP)?),
            GroupKind::FullSymmetric => None,
        };
        Ok(Self { group, mode, elements })
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    pub fn mode(&self) -> RepMode {
        self.mode
    }

    pub fn canonical(&self, state: &GlobalState) -> Result<GlobalState> {
        match self.mode {
            RepMode::Sort => rep_sort(state),
            RepMode::MinOverGroup => self.canonical_with_witness(state).map(|(s, _)| s),
        }
    }

    pub fn canonical_with_witness(&self, state: &GlobalState) -> Result<(GlobalState, Permutation)> {
        match &self.elements {
            Some(elements) => rep_min_enumerated(elements, state),
            None => rep_min(&self.group, state),
        }
    }

    /// Size of the orbit of `rep`. Pid-free states under full symmetry use the
    /// multinomial `n! / prod(m_l!)` over multiplicities of equal records;
    /// everything else enumerates the orbit.
    pub fn orbit_size(&self, rep: &GlobalState) -> Result<u128> {
        match self.mode {
            RepMode::Sort => multiset_orbit_size(rep),
            RepMode::MinOverGroup => match &self.elements {
                Some(elements) => {
                    let mut images = HashSet::new();
                    for g in elements {
                        images.insert(g.apply(rep)?);
                    }
                    Ok(images.len() as u128)
                }
                None => Ok(self.group.orbit_capped(rep, ENUMERATION_CAP)?.len() as u128),
            },
        }
    }
}

/// `n! / prod(m!)` for the multiplicities `m` of equal local records.
pub fn multiset_orbit_size(state: &GlobalState) -> Result<u128> {
    let mut sorted = state.locals.clone();
    sorted.sort_unstable();
    let mut size: u128 = 1;
    let mut placed: u128 = 0;
    let mut i = 0;
    let overflow = || Error::SizeCapExceeded {
        size: state.n(),
        cap: 34,
    };
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        // multiply by C(placed + m, m), one factor at a time so each step is exact
        for step in 1..=(j - i) as u128 {
            size = size.checked_mul(placed + step).ok_or_else(overflow)? / step;
        }
        placed += (j - i) as u128;
        i = j;
    }
    Ok(size)
}

pub fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// True iff `perm` preserves labels and successor sets on every sampled state.
pub fn is_automorphism(perm: &Permutation, program: &Program, sample: &BTreeSet<GlobalState>) -> Result<bool> {
    perm.check_degree(program.n)?;
    for s in sample {
        let moved = perm.apply(s)?;
        if program.state_props(&moved) != program.state_props(s) {
            return Ok(false);
        }
        let mapped: BTreeSet<GlobalState> = program
            .successors(s)
            .into_iter()
            .map(|(_, t)| perm.apply(&t))
            .collect::<Result<_>>()?;
        let direct: BTreeSet<GlobalState> = program.successors(&moved).into_iter().map(|(_, t)| t).collect();
        if mapped != direct {
            return Ok(false);
        }
    }
    Ok(true)
}
