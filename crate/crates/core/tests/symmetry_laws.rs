mod common;

use std::collections::BTreeSet;

use common::{all_perms, random_pid_free, random_with_pids, state};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symmc::frontend::{builtin_example, GlobalState, LocalRecord};
use symmc::symmetry::{
    factorial, multiset_orbit_size, rep_min, rep_sort, Canonicalizer, PermGroup, Permutation, RepMode,
};

fn arb_shaped(n: usize, shared: usize) -> impl Strategy<Value = GlobalState> {
    (
        prop::collection::vec(any::<bool>(), shared),
        prop::collection::vec((0u16..4, 0u64..4), n),
    )
        .prop_map(|(shared, locals)| GlobalState {
            shared: shared.into_iter().map(symmc::frontend::Value::Bool).collect(),
            locals: locals.into_iter().map(|(pc, vars)| LocalRecord { pc, vars }).collect(),
        })
}

fn arb_state(max_n: usize) -> impl Strategy<Value = GlobalState> {
    (1..=max_n, 0usize..3).prop_flat_map(|(n, shared)| arb_shaped(n, shared))
}

fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|m| Permutation::new(m).unwrap())
}

proptest! {
    #[test]
    fn rep_sort_is_idempotent(s in arb_state(8)) {
        let r = rep_sort(&s).unwrap();
        prop_assert_eq!(rep_sort(&r).unwrap(), r);
    }

    #[test]
    fn rep_sort_is_permutation_invariant((s, p) in arb_state(8).prop_flat_map(|s| {
        let n = s.n();
        (Just(s), arb_perm(n))
    })) {
        prop_assert_eq!(rep_sort(&p.apply(&s).unwrap()).unwrap(), rep_sort(&s).unwrap());
    }

    #[test]
    fn apply_respects_composition((s, p, q) in arb_state(6).prop_flat_map(|s| {
        let n = s.n();
        (Just(s), arb_perm(n), arb_perm(n))
    })) {
        let pq = p.compose(&q).unwrap();
        prop_assert_eq!(pq.apply(&s).unwrap(), p.apply(&q.apply(&s).unwrap()).unwrap());
        prop_assert_eq!(p.inverse().apply(&p.apply(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn encoding_order_matches_derived_order((a, b) in (1usize..=4, 0usize..3).prop_flat_map(|(n, shared)| {
        (arb_shaped(n, shared), arb_shaped(n, shared))
    })) {
        prop_assert_eq!(a.cmp(&b), a.encode().cmp(&b.encode()));
    }
}

#[test]
fn rep_sort_equals_min_over_all_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=6 {
        let perms = all_perms(n);
        for _ in 0..200 {
            let s = random_pid_free(&mut rng, n, 3, 2, 1);
            let brute = perms.iter().map(|p| p.apply(&s).unwrap()).min().unwrap();
            assert_eq!(rep_sort(&s).unwrap(), brute);
            let (greedy, witness) = rep_min(&PermGroup::full_symmetric(n), &s).unwrap();
            assert_eq!(greedy, brute);
            assert_eq!(witness.apply(&s).unwrap(), brute);
        }
    }
}

#[test]
fn greedy_rep_min_with_pids_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=5 {
        let perms = all_perms(n);
        for _ in 0..300 {
            let s = random_with_pids(&mut rng, n, 3, 2);
            let brute = perms.iter().map(|p| p.apply(&s).unwrap()).min().unwrap();
            let (greedy, witness) = rep_min(&PermGroup::full_symmetric(n), &s).unwrap();
            assert_eq!(greedy, brute, "{s:?}");
            assert_eq!(witness.apply(&s).unwrap(), brute);
        }
    }
}

#[test]
fn generated_orbit_equals_orbit_over_all_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=5 {
        let perms = all_perms(n);
        let group = PermGroup::full_symmetric(n);
        for _ in 0..50 {
            let s = random_with_pids(&mut rng, n, 3, 1);
            let brute: BTreeSet<GlobalState> = perms.iter().map(|p| p.apply(&s).unwrap()).collect();
            let orbit = group.orbit(&s).unwrap();
            assert_eq!(orbit, brute);
            assert_eq!(factorial(n).unwrap() % orbit.len() as u128, 0);
        }
    }
}

#[test]
fn generators_produce_the_whole_group() {
    for n in 1..=5 {
        let elements: BTreeSet<Vec<usize>> = PermGroup::full_symmetric(n)
            .elements(1_000)
            .unwrap()
            .iter()
            .map(|p| p.as_slice().to_vec())
            .collect();
        assert_eq!(elements.len() as u128, factorial(n).unwrap());
    }
}

#[test]
fn subgroup_representative_is_least_in_subgroup_orbit() {
    // the cyclic rotations only
    let n = 4;
    let group = PermGroup::generated(n, vec![Permutation::cycle(n)]).unwrap();
    assert_eq!(group.elements(100).unwrap().len(), n);
    let s = state(&[2, 0, 1, 0]);
    let (rep, _) = rep_min(&group, &s).unwrap();
    let orbit = group.orbit(&s).unwrap();
    assert_eq!(orbit.len(), 4);
    assert_eq!(&rep, orbit.iter().next().unwrap());
    // a rotation cannot sort this state
    assert_ne!(rep, rep_sort(&s).unwrap());
}

#[test]
fn multiset_orbit_size_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=6 {
        let group = PermGroup::full_symmetric(n);
        for _ in 0..50 {
            let s = random_pid_free(&mut rng, n, 3, 1, 0);
            assert_eq!(multiset_orbit_size(&s).unwrap(), group.orbit(&s).unwrap().len() as u128);
        }
    }
}

#[test]
fn canonicalizer_mode_follows_pid_rule() {
    let mutex = builtin_example("mutex", 3).unwrap();
    let alloc = builtin_example("allocator", 3).unwrap();
    assert_eq!(
        Canonicalizer::new(&mutex, PermGroup::full_symmetric(3)).unwrap().mode(),
        RepMode::Sort
    );
    assert_eq!(
        Canonicalizer::new(&alloc, PermGroup::full_symmetric(3)).unwrap().mode(),
        RepMode::MinOverGroup
    );
    assert!(Canonicalizer::new(&mutex, PermGroup::full_symmetric(4)).is_err());
}

#[test]
fn large_group_enumeration_is_capped() {
    let group = PermGroup::full_symmetric(12);
    assert!(matches!(group.elements(1_000), Err(symmc::Error::GroupTooLarge { cap: 1_000 })));
}
