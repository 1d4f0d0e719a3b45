use slin_checkers::{
    check_equivalence, equivalent_to_some_strong_adversary, CheckError, Equivalence,
};
use slin_engine::enumerate::all_runs;
use slin_engine::scenarios::{
    flip_counter, snapshot, snapshot_strong_script, snapshot_weak_script, Variant,
};
use slin_engine::{AdversaryClass, SeededRandom, DEFAULT_BUDGET};
use slin_history::Value;

const LIMIT: usize = 5_000_000;

#[test]
fn identical_run_sets_are_equivalent() {
    let runs = all_runs(
        &snapshot(Variant::Atomic),
        snapshot_strong_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert_eq!(
        check_equivalence(&runs, &runs).unwrap(),
        Equivalence::Equivalent
    );
    let runs = all_runs(
        &snapshot(Variant::Implemented),
        snapshot_weak_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert_eq!(
        check_equivalence(&runs, &runs).unwrap(),
        Equivalence::Equivalent
    );
}

#[test]
fn snapshot_weak_runs_differ_from_the_atomic_script() {
    let imp = all_runs(
        &snapshot(Variant::Implemented),
        snapshot_weak_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    let atomic = all_runs(
        &snapshot(Variant::Atomic),
        snapshot_strong_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert_eq!(
        check_equivalence(&imp, &atomic).unwrap(),
        Equivalence::NotEquivalent {
            coins: vec![Value::Int(-1)]
        }
    );
}

#[test]
fn no_strong_adversary_matches_the_snapshot_weak_runs() {
    let imp = all_runs(
        &snapshot(Variant::Implemented),
        snapshot_weak_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(!equivalent_to_some_strong_adversary(&imp, &snapshot(Variant::Atomic), LIMIT).unwrap());
}

#[test]
fn mutex_counter_runs_are_matched_by_some_strong_adversary() {
    for seed in 0..10 {
        let imp = all_runs(
            &flip_counter(Variant::Implemented),
            || SeededRandom::new(AdversaryClass::Strong, seed),
            2,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(
            equivalent_to_some_strong_adversary(&imp, &flip_counter(Variant::Atomic), LIMIT)
                .unwrap()
        );
    }
}

#[test]
fn mismatched_indices_are_errors() {
    let one = all_runs(
        &snapshot(Variant::Atomic),
        snapshot_strong_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    assert!(matches!(
        check_equivalence(&one, &one[..1]),
        Err(CheckError::IndexMismatch(_))
    ));
    let mut relabelled = one.clone();
    relabelled[0].0 = vec![Value::Int(7)];
    assert!(matches!(
        check_equivalence(&one, &relabelled),
        Err(CheckError::IndexMismatch(_))
    ));
}
