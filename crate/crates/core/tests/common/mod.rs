#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use itertools::Itertools;
use rand::Rng;
use symmc::frontend::{GlobalState, LocalRecord, ProcRef, Program, Value};
use symmc::symmetry::Permutation;

pub fn state(pcs: &[u16]) -> GlobalState {
    GlobalState {
        shared: vec![],
        locals: pcs.iter().map(|&p| LocalRecord::at(p)).collect(),
    }
}

/// Every permutation of `0..n`, listed directly rather than generated.
pub fn all_perms(n: usize) -> Vec<Permutation> {
    (0..n)
        .permutations(n)
        .map(|p| Permutation::new(p).unwrap())
        .collect()
}

pub fn random_pid_free(rng: &mut impl Rng, n: usize, pcs: u16, locals: u32, shared_bools: usize) -> GlobalState {
    GlobalState {
        shared: (0..shared_bools).map(|_| Value::Bool(rng.gen())).collect(),
        locals: (0..n)
            .map(|_| LocalRecord {
                pc: rng.gen_range(0..pcs),
                vars: rng.gen_range(0..1u64 << locals),
            })
            .collect(),
    }
}

pub fn random_with_pids(rng: &mut impl Rng, n: usize, pcs: u16, pid_vars: usize) -> GlobalState {
    let mut s = random_pid_free(rng, n, pcs, 1, 1);
    for _ in 0..pid_vars {
        let v = if rng.gen_bool(0.25) {
            ProcRef::None
        } else {
            ProcRef::Index(rng.gen_range(0..n as u32))
        };
        s.shared.push(Value::Pid(v));
    }
    s
}

/// Plain BFS over `Program::successors`, returning each state's distance from
/// the initial state.
pub fn brute_force_distances(program: &Program) -> HashMap<GlobalState, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    let init = program.initial_state();
    dist.insert(init.clone(), 0);
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for (_, t) in program.successors(&s) {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Mutex semantics written out by hand over pc vectors (0 = T, 1 = W, 2 = C).
/// `guarded = false` gives the broken variant.
pub fn mutex_oracle_reached(n: usize, guarded: bool) -> BTreeMap<Vec<u16>, usize> {
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(vec![0; n], 0);
    queue.push_back(vec![0u16; n]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for i in 0..n {
            let next_pc = match s[i] {
                0 => Some(1),
                1 if !guarded || (0..n).all(|j| j == i || s[j] != 2) => Some(2),
                1 => None,
                _ => Some(0),
            };
            if let Some(pc) = next_pc {
                let mut t = s.clone();
                t[i] = pc;
                if !dist.contains_key(&t) {
                    dist.insert(t.clone(), d + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    dist
}

/// Multisets of size `n` drawn from `k` kinds, counted by listing them.
pub fn multisets(n: usize, k: usize) -> usize {
    (0..k).combinations_with_replacement(n).count()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

/// Backward BFS from `targets` along reversed edges.
pub fn backward_reach(edges: &[(usize, usize)], targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut preds: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(s, t) in edges {
        preds.entry(t).or_default().push(s);
    }
    let mut seen = targets.clone();
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    while let Some(t) = queue.pop_front() {
        for &s in preds.get(&t).into_iter().flatten() {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    seen
}

pub fn free_cycling(k: usize, n: usize) -> String {
    let pcs: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
    let mut src = format!("processes {n};\npc {{{}}};\ninit pc=p0;\n", pcs.join(", "));
    for i in 0..k {
        src.push_str(&format!("{} -> {} : true / ;\n", pcs[i], pcs[(i + 1) % k]));
    }
    src
}
