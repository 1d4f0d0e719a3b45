use num_rational::Rational64;
use slin_engine::enumerate::{all_runs, enumerate_expectation};
use slin_engine::game::{solve, Expectation, Producible};
use slin_engine::scenarios::*;
use slin_engine::{AdversaryClass, RunRecord, ScheduleScript, DEFAULT_BUDGET};
use slin_history::Value;

const LIMIT: usize = 5_000_000;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

#[test]
fn snapshot_values() {
    let atomic = snapshot(Variant::Atomic);
    let strong = solve(
        &atomic,
        AdversaryClass::Strong,
        &Expectation::min(snapshot_payoff),
        LIMIT,
    )
    .unwrap();
    assert_eq!(strong, r(-1, 1));
    let weak = solve(
        &atomic,
        AdversaryClass::Weak,
        &Expectation::min(snapshot_payoff),
        LIMIT,
    )
    .unwrap();
    assert_eq!(weak, r(0, 1));
    let fixed = enumerate_expectation(
        &atomic,
        snapshot_strong_script,
        1,
        DEFAULT_BUDGET,
        snapshot_payoff,
    )
    .unwrap();
    assert_eq!(fixed, r(-1, 1));
    let imp = snapshot(Variant::Implemented);
    let e = enumerate_expectation(
        &imp,
        snapshot_weak_script,
        1,
        DEFAULT_BUDGET,
        snapshot_payoff,
    )
    .unwrap();
    assert_eq!(e, r(-2, 1));
}

#[test]
fn snapshot_weak_runs_complete() {
    let runs = all_runs(
        &snapshot(Variant::Implemented),
        snapshot_weak_script,
        1,
        DEFAULT_BUDGET,
    )
    .unwrap();
    for (c, rec) in &runs {
        assert!(rec.procs.iter().all(|p| p.halted), "coin {c:?}");
        let sums: i64 = rec
            .returned(0)
            .unwrap()
            .as_tuple()
            .unwrap()
            .iter()
            .filter_map(Value::as_int)
            .sum();
        let want = if c[0] == Value::Int(1) { 2 } else { -6 };
        assert_eq!(sums, want);
    }
}

#[test]
fn srsw_values() {
    let atomic = srsw(Variant::Atomic);
    let strong = solve(
        &atomic,
        AdversaryClass::Strong,
        &Expectation::min(srsw_payoff),
        LIMIT,
    )
    .unwrap();
    assert_eq!(strong, r(1, 1));
    let imp = srsw(Variant::Implemented);
    let e = enumerate_expectation(
        &imp,
        || ScheduleScript::oblivious(srsw_oblivious_schedule()),
        1,
        DEFAULT_BUDGET,
        srsw_payoff,
    )
    .unwrap();
    assert_eq!(e, r(1, 2));
}

#[test]
fn mrsw_values() {
    let atomic = mrsw(Variant::Atomic);
    let strong = solve(
        &atomic,
        AdversaryClass::Strong,
        &Expectation::min(mrsw_payoff),
        LIMIT,
    )
    .unwrap();
    assert_eq!(strong, r(0, 1));
    let imp = mrsw(Variant::Implemented);
    let e = enumerate_expectation(&imp, mrsw_weak_script, 1, DEFAULT_BUDGET, mrsw_payoff).unwrap();
    assert_eq!(e, r(-1, 2));
}

#[test]
fn hw_queue_values() {
    let imp = hw_queue(Variant::Implemented);
    let e = enumerate_expectation(&imp, hw_weak_script, 1, DEFAULT_BUDGET, hw_payoff).unwrap();
    assert_eq!(e, r(1, 1));
    let atomic = hw_queue(Variant::Atomic);
    let best = solve(
        &atomic,
        AdversaryClass::Strong,
        &Expectation::max(hw_payoff),
        LIMIT,
    )
    .unwrap();
    assert_eq!(best, r(1, 2));
    let strong =
        enumerate_expectation(&imp, hw_strong_script, 1, DEFAULT_BUDGET, hw_payoff).unwrap();
    assert_eq!(strong, r(1, 1));
}

#[test]
fn hw_queue_without_order_condition() {
    let atomic = hw_queue(Variant::Atomic);
    let best = solve(
        &atomic,
        AdversaryClass::Strong,
        &Expectation::max(hw_payoff_without_order),
        LIMIT,
    )
    .unwrap();
    assert_eq!(best, r(1, 2));
}

#[test]
fn three_writers_games() {
    let alg = three_writers();
    let all_done = Producible {
        accept: |rec: &RunRecord| rec.procs.iter().all(|p| p.halted),
    };
    assert!(solve(&alg, AdversaryClass::Strong, &all_done, LIMIT).unwrap());
}
