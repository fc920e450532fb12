mod common;

use std::collections::BTreeSet;

use common::{all_perms, binomial, brute_force_distances, free_cycling, multisets, mutex_oracle_reached};
use symmc::counter::{
    build_counter_structure, check_isomorphism, from_counter, to_counter, CounterState,
};
use symmc::explore::{build_model, compare_modes, reach, ExploreOptions, Mode, Model, ReachedSet};
use symmc::frontend::{build_full_structure, builtin_example, parse_program, GlobalState, BUILTIN_NAMES};
use symmc::kripke::TotalizePolicy;
use symmc::quotient::{build_quotient, check_bisimulation, check_symmetric_labeling};
use symmc::symmetry::{is_automorphism, rep_sort, PermGroup};
use symmc::Error;

const BOUND: usize = 1_000_000;

fn pcs_of(s: &GlobalState) -> Vec<u16> {
    s.locals.iter().map(|l| l.pc).collect()
}

#[test]
fn mutex_full_matches_hand_written_semantics() {
    for n in 1..=6 {
        let p = builtin_example("mutex", n).unwrap();
        let full = build_full_structure(&p, BOUND).unwrap();
        let ours: BTreeSet<Vec<u16>> = full.payloads().iter().map(pcs_of).collect();
        let oracle: BTreeSet<Vec<u16>> = mutex_oracle_reached(n, true).into_keys().collect();
        assert_eq!(ours, oracle, "n = {n}");
        assert_eq!(full.len(), (1 << n) + n * (1 << (n - 1)));
    }
}

#[test]
fn broken_mutex_full_matches_hand_written_semantics() {
    for n in 1..=4 {
        let p = builtin_example("broken-mutex", n).unwrap();
        let full = build_full_structure(&p, BOUND).unwrap();
        assert_eq!(full.len(), 3usize.pow(n as u32));
        let ours: BTreeSet<Vec<u16>> = full.payloads().iter().map(pcs_of).collect();
        assert_eq!(ours, mutex_oracle_reached(n, false).into_keys().collect());
    }
    let p = builtin_example("broken-mutex", 2).unwrap();
    let dist = brute_force_distances(&p);
    assert_eq!(dist[&common::state(&[2, 2])], 4);
}

#[test]
fn mutex_ten_counts() {
    let p = builtin_example("mutex", 10).unwrap();
    let (full, _) = reach(&p, Mode::Full, BOUND, false).unwrap();
    let (quotient, _) = reach(&p, Mode::Quotient, BOUND, false).unwrap();
    let (counter, _) = reach(&p, Mode::Counter, BOUND, false).unwrap();
    assert_eq!(full.len(), (1 << 10) + 10 * (1 << 9));
    assert_eq!(full.len(), 6144);
    // at most one process in C: multisets over {T, W} of size 10 or 9
    let oracle = multisets(10, 2) + multisets(9, 2);
    assert_eq!(oracle, 21);
    assert_eq!(quotient.len(), oracle);
    assert_eq!(counter.len(), oracle);
}

#[test]
fn allocator_single_process() {
    let p = builtin_example("allocator", 1).unwrap();
    let (full, _) = reach(&p, Mode::Full, BOUND, false).unwrap();
    assert_eq!(full.len(), 3);
}

#[test]
fn free_cycling_counter_is_stars_and_bars() {
    for (k, n) in [(3, 4), (2, 5), (4, 3)] {
        let p = parse_program(&free_cycling(k, n)).unwrap();
        let counter = build_counter_structure(&p, BOUND).unwrap();
        let expected = binomial((n + k - 1) as u64, (k - 1) as u64) as usize;
        assert_eq!(counter.len(), expected);
        assert_eq!(counter.len(), multisets(n, k));
        let full = build_full_structure(&p, BOUND).unwrap();
        assert_eq!(full.len(), k.pow(n as u32));
    }
    let p = parse_program(&free_cycling(3, 4)).unwrap();
    assert_eq!(build_counter_structure(&p, BOUND).unwrap().len(), 15);
}

#[test]
fn orbit_sizes_partition_full_state_space() {
    for name in BUILTIN_NAMES {
        for n in 1..=4 {
            let p = builtin_example(name, n).unwrap();
            let full = build_full_structure(&p, BOUND).unwrap();
            let q = build_quotient(&p, PermGroup::full_symmetric(n), BOUND).unwrap();
            assert_eq!(q.covered_states(), full.len() as u128, "{name}({n})");
            let reps: BTreeSet<GlobalState> =
                full.payloads().iter().map(|s| q.canonicalizer.canonical(s).unwrap()).collect();
            assert_eq!(reps.len(), q.structure.len());
            for (id, &size) in q.orbit_size.iter().enumerate() {
                assert_eq!(symmc::symmetry::factorial(n).unwrap() % size, 0);
                let rep = q.structure.payload(id).unwrap();
                assert_eq!(q.canonicalizer.canonical(rep).unwrap(), *rep);
            }
        }
    }
}

#[test]
fn successors_commute_with_every_permutation() {
    for name in BUILTIN_NAMES {
        for n in 1..=4 {
            let p = builtin_example(name, n).unwrap();
            let full = build_full_structure(&p, BOUND).unwrap();
            for perm in all_perms(n) {
                for s in full.payloads() {
                    let moved = perm.apply(s).unwrap();
                    assert!(full.id_of(&moved).is_some(), "reached set is closed under permutation");
                    let mut mapped: Vec<(String, GlobalState)> = p
                        .successors(s)
                        .into_iter()
                        .map(|(a, t)| (perm.remap_action(&a), perm.apply(&t).unwrap()))
                        .collect();
                    let mut direct = p.successors(&moved);
                    mapped.sort();
                    direct.sort();
                    assert_eq!(mapped, direct);
                    assert_eq!(p.state_props(&moved), p.state_props(s));
                }
            }
        }
    }
}

#[test]
fn labels_are_symmetric_on_builtins() {
    for name in BUILTIN_NAMES {
        let p = builtin_example(name, 3).unwrap();
        let full = build_full_structure(&p, BOUND).unwrap();
        assert!(check_symmetric_labeling(&p, full.payloads()).unwrap().is_clean());
    }
}

#[test]
fn bisimulation_holds_on_builtins() {
    for name in BUILTIN_NAMES {
        for n in 1..=4 {
            let p = builtin_example(name, n).unwrap();
            let mut full = build_full_structure(&p, BOUND).unwrap();
            full.totalize(TotalizePolicy::SelfLoop).unwrap();
            let mut q = build_quotient(&p, PermGroup::full_symmetric(n), BOUND).unwrap();
            q.structure.totalize(TotalizePolicy::SelfLoop).unwrap();
            assert!(check_bisimulation(&full, &q).unwrap(), "{name}({n})");
        }
    }
}

#[test]
fn counter_is_isomorphic_to_quotient() {
    for name in ["mutex", "broken-mutex"] {
        for n in 1..=5 {
            let p = builtin_example(name, n).unwrap();
            let counter = build_counter_structure(&p, BOUND).unwrap();
            let q = build_quotient(&p, PermGroup::full_symmetric(n), BOUND).unwrap();
            let report = check_isomorphism(&counter, &q);
            assert!(report.isomorphic, "{name}({n}): {:?}", report.discrepancy);
        }
    }
}

#[test]
fn counter_round_trip() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    for n in 1..=6 {
        let perms = all_perms(n);
        for _ in 0..50 {
            let s = common::random_pid_free(&mut rng, n, 4, 2, 2);
            let c: CounterState = to_counter(&s).unwrap();
            assert_eq!(c.population() as usize, n);
            assert_eq!(from_counter(&c), rep_sort(&s).unwrap());
            assert_eq!(to_counter(&from_counter(&c)).unwrap(), c);
            for perm in perms.iter().step_by(7) {
                assert_eq!(to_counter(&perm.apply(&s).unwrap()).unwrap(), c);
            }
        }
    }
}

#[test]
fn counter_rejects_pid_programs() {
    let p = builtin_example("allocator", 3).unwrap();
    assert!(matches!(
        reach(&p, Mode::Counter, BOUND, false),
        Err(Error::UnsupportedAbstraction(_))
    ));
    let report = compare_modes(&p, &ExploreOptions::default()).unwrap();
    assert!(report.counter.is_none());
    assert!(report.counter_unsupported.is_some());
    assert_eq!(report.full.states_reached, build_full_structure(&p, BOUND).unwrap().len());
}

#[test]
fn comparison_reports() {
    let p = builtin_example("mutex", 10).unwrap();
    let report = compare_modes(&p, &ExploreOptions::default()).unwrap();
    assert_eq!(report.full.states_reached, 6144);
    assert_eq!(report.quotient.states_reached, 21);
    assert_eq!(report.counter.as_ref().unwrap().states_reached, 21);
    assert!((report.reduction_factor - 6144.0 / 21.0).abs() < 1e-9);

    let one = builtin_example("mutex", 1).unwrap();
    assert_eq!(compare_modes(&one, &ExploreOptions::default()).unwrap().reduction_factor, 1.0);
}

#[test]
fn bad_reached_agrees_across_modes() {
    for name in BUILTIN_NAMES {
        for n in 1..=4 {
            let p = builtin_example(name, n).unwrap();
            let mut seen = Vec::new();
            for mode in Mode::ALL {
                match reach(&p, mode, BOUND, false) {
                    Ok((_, stats)) => seen.push(stats.bad_reached),
                    Err(Error::UnsupportedAbstraction(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
            let expected = *name == "broken-mutex" && n >= 2;
            assert!(seen.iter().all(|&b| b == expected), "{name}({n}): {seen:?}");
        }
    }
}

#[test]
fn stop_at_bad_halts_early() {
    let p = builtin_example("broken-mutex", 3).unwrap();
    for mode in Mode::ALL {
        let (partial, stats) = reach(&p, mode, BOUND, true).unwrap();
        let (complete, _) = reach(&p, mode, BOUND, false).unwrap();
        assert!(stats.bad_reached);
        assert!(partial.len() <= complete.len());
    }
    let (partial, _) = reach(&p, Mode::Full, BOUND, true).unwrap();
    let ReachedSet::Concrete(states) = partial else { panic!() };
    assert!(states.iter().any(|s| s.locals.iter().filter(|l| l.pc == 2).count() >= 2));
}

#[test]
fn bound_exceeded_reports_partial_stats() {
    let p = builtin_example("mutex", 6).unwrap();
    match reach(&p, Mode::Full, 10, false) {
        Err(Error::BoundExceeded { bound, stats, .. }) => {
            assert_eq!(bound, 10);
            assert!(stats.states_reached <= 10);
            assert!(stats.states_reached >= 1);
        }
        other => panic!("expected a bound error, got {other:?}"),
    }
}

#[test]
fn parallel_exploration_is_identical() {
    for name in BUILTIN_NAMES {
        let p = builtin_example(name, 5).unwrap();
        for mode in Mode::ALL {
            let seq = build_model(&p, mode, &ExploreOptions::default());
            let par = build_model(
                &p,
                mode,
                &ExploreOptions {
                    parallel: true,
                    ..ExploreOptions::default()
                },
            );
            match (seq, par) {
                (Ok((Model::Full(a), sa)), Ok((Model::Full(b), sb))) => {
                    assert_eq!(a.payloads(), b.payloads());
                    assert_eq!(a.edges().count(), b.edges().count());
                    assert_eq!(sa.states_reached, sb.states_reached);
                    assert_eq!(sa.frontier_peak, sb.frontier_peak);
                }
                (Ok((Model::Quotient(a), _)), Ok((Model::Quotient(b), _))) => {
                    assert_eq!(a.structure.payloads(), b.structure.payloads());
                    assert_eq!(a.orbit_size, b.orbit_size);
                }
                (Ok((Model::Counter(a), _)), Ok((Model::Counter(b), _))) => {
                    assert_eq!(a.payloads(), b.payloads());
                }
                (Err(_), Err(_)) => {}
                _ => panic!("{name} {mode}: sequential and parallel runs disagree"),
            }
        }
    }
}

#[test]
fn exploration_is_deterministic() {
    let p = builtin_example("allocator", 4).unwrap();
    let a = build_full_structure(&p, BOUND).unwrap();
    let b = build_full_structure(&p, BOUND).unwrap();
    assert_eq!(a.payloads(), b.payloads());
    let ea: Vec<_> = a.edges().map(|e| (e.source, e.action.to_string(), e.target)).collect();
    let eb: Vec<_> = b.edges().map(|e| (e.source, e.action.to_string(), e.target)).collect();
    assert_eq!(ea, eb);
}

#[test]
fn totalize_counts_terminal_states() {
    let p = parse_program("processes 3; pc {A, B, D}; init pc=A; A -> B : true / ; B -> D : true / ;").unwrap();
    let mut full = build_full_structure(&p, BOUND).unwrap();
    let scanned = full.payloads().iter().filter(|s| p.successors(s).is_empty()).count();
    // every process finished: only [D, D, D]
    assert_eq!(scanned, 1);
    let report = full.totalize(TotalizePolicy::SelfLoop).unwrap();
    assert_eq!(report.deadlocked.len(), scanned);
    assert!(full.is_total());

    let mut again = build_full_structure(&p, BOUND).unwrap();
    assert!(matches!(
        again.totalize(TotalizePolicy::Reject),
        Err(Error::Deadlock { .. })
    ));
}

#[test]
fn nondeterministic_update_expands_both_branches() {
    let p = parse_program("processes 2; local x : bool; pc {A, B}; init pc=A; A -> B : true / x := *; B -> A : true / ;")
        .unwrap();
    let init = p.initial_state();
    let succ = p.successors(&init);
    assert_eq!(succ.len(), 4);
    let full = build_full_structure(&p, BOUND).unwrap();
    // x survives the return to A, so every (pc, x) pair is a local record
    assert_eq!(full.len(), 16);
    let q = build_quotient(&p, PermGroup::full_symmetric(2), BOUND).unwrap();
    assert_eq!(q.structure.len(), multisets(2, 4));
}

/// A program whose guard singles out process 0, so the process symmetry is
/// not an automorphism.
fn asymmetric_program(n: usize) -> symmc::frontend::Program {
    use symmc::frontend::{Guard, LabelDef, LabelExpr};
    let mut p = parse_program(&format!(
        "processes {n}; shared owner : pid; pc {{idle, busy}}; init pc=idle, owner=none;
         idle -> busy : owner == none / owner := self;
         busy -> idle : owner == self / owner := none;"
    ))
    .unwrap();
    // only an owner of index 0 can release
    p.commands[1].guard = Guard::PidIsIndex(0, 0);
    p.labels.push(LabelDef {
        name: "first_busy".into(),
        expr: LabelExpr::ProcessAt { process: 0, pc: 1 },
    });
    p
}

#[test]
fn asymmetric_program_is_detected() {
    let p = asymmetric_program(3);
    assert!(p.uses_asymmetric_atoms());
    let sample: BTreeSet<GlobalState> = common::brute_force_distances(&p).into_keys().collect();
    let swap = symmc::symmetry::Permutation::transposition(3, 0, 1);
    assert!(!is_automorphism(&swap, &p, &sample).unwrap());
    let report = check_symmetric_labeling(&p, &sample).unwrap();
    assert!(!report.is_clean());
    assert!(matches!(
        build_quotient(&p, PermGroup::full_symmetric(3), BOUND),
        Err(Error::LabelSymmetry { .. })
    ));

    let symmetric = builtin_example("allocator", 3).unwrap();
    let sample: BTreeSet<GlobalState> = common::brute_force_distances(&symmetric).into_keys().collect();
    for perm in all_perms(3) {
        assert!(is_automorphism(&perm, &symmetric, &sample).unwrap());
    }
}
