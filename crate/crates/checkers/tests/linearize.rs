mod common;

use common::{arb_history, naive_linearizable, registry, Kind};
use proptest::prelude::*;
use slin_checkers::{check_linearization, linearize_one};
use slin_history::{History, ObjectId, ProcessId, StepKind, Value};

type Event = (StepKind, &'static str, Value);

fn agrees_with_oracle(h: &slin_history::History) -> Result<(), TestCaseError> {
    let specs = h.specs();
    let found = linearize_one(h, &specs).unwrap();
    prop_assert_eq!(found.is_some(), naive_linearizable(h, &specs));
    if let Some(l) = found {
        prop_assert!(check_linearization(h, &l, &specs).is_ok());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn register_histories_match_permutation_search(h in arb_history(Kind::Register)) {
        agrees_with_oracle(&h)?;
    }

    #[test]
    fn queue_histories_match_permutation_search(h in arb_history(Kind::Queue)) {
        agrees_with_oracle(&h)?;
    }
}

#[test]
fn concurrent_dequeues_may_swap() {
    let mut h = registry(Kind::Queue, 3);
    let (a, b, c, o) = (ProcessId(0), ProcessId(1), ProcessId(2), ObjectId(0));
    h.push_atomic(a, o, "enqueue", vec![1.into()], Value::Unit);
    h.push_atomic(a, o, "enqueue", vec![2.into()], Value::Unit);
    h.push(StepKind::Inv, b, o, "dequeue", Value::Tuple(vec![]));
    h.push(StepKind::Inv, c, o, "dequeue", Value::Tuple(vec![]));
    h.push(StepKind::Rsp, b, o, "dequeue", 2.into());
    h.push(StepKind::Rsp, c, o, "dequeue", 1.into());
    let specs = h.specs();
    assert!(naive_linearizable(&h, &specs));
    let l = linearize_one(&h, &specs).unwrap().unwrap();
    check_linearization(&h, &l, &specs).unwrap();
    let deqs: Vec<_> = l
        .operations()
        .into_iter()
        .filter(|o| o.op == "dequeue")
        .collect();
    assert_eq!(deqs[0].process, c);
}

#[test]
fn too_many_operations_is_refused() {
    let mut h = registry(Kind::Register, 1);
    for _ in 0..129 {
        h.push_atomic(ProcessId(0), ObjectId(0), "read", vec![], 0.into());
    }
    assert!(linearize_one(&h, &h.specs()).is_err());
}

fn variants(kind: Kind) -> Vec<(&'static str, Value, Value)> {
    let none = || Value::Tuple(vec![]);
    let one = |v: i64| Value::Tuple(vec![Value::Int(v)]);
    match kind {
        Kind::Register => vec![
            ("write", one(1), Value::Unit),
            ("write", one(2), Value::Unit),
            ("read", none(), Value::Int(0)),
            ("read", none(), Value::Int(1)),
            ("read", none(), Value::Int(2)),
        ],
        Kind::Queue => vec![
            ("enqueue", one(1), Value::Unit),
            ("enqueue", one(2), Value::Unit),
            ("dequeue", none(), Value::Empty),
            ("dequeue", none(), Value::Int(1)),
            ("dequeue", none(), Value::Int(2)),
        ],
    }
}

/// Every event list of one process with `ops` operations, the last possibly pending.
fn process_events(kind: Kind, ops: usize) -> Vec<Vec<Event>> {
    let vs = variants(kind);
    let mut seqs: Vec<Vec<Event>> = vec![Vec::new()];
    for _ in 0..ops {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                vs.iter().map(move |(op, args, ret)| {
                    let mut s = s.clone();
                    s.push((StepKind::Inv, *op, args.clone()));
                    s.push((StepKind::Rsp, *op, ret.clone()));
                    s
                })
            })
            .collect();
    }
    let pending: Vec<Vec<Event>> = seqs.iter().map(|s| s[..s.len() - 1].to_vec()).collect();
    seqs.extend(pending);
    seqs
}

fn interleave(h: &mut History, procs: &mut [&[Event]], out: &mut Vec<History>) {
    if procs.iter().all(|p| p.is_empty()) {
        out.push(h.clone());
        return;
    }
    for i in 0..procs.len() {
        let Some(((k, op, payload), rest)) = procs[i].split_first() else {
            continue;
        };
        let saved = procs[i];
        procs[i] = rest;
        h.push(*k, ProcessId(i as u32), ObjectId(0), *op, payload.clone());
        interleave(h, procs, out);
        h.steps.pop();
        procs[i] = saved;
    }
}

/// All histories whose processes run the given numbers of operations.
fn exhaustive(kind: Kind, shape: &[usize]) -> usize {
    let per: Vec<Vec<Vec<Event>>> = shape.iter().map(|n| process_events(kind, *n)).collect();
    let mut pick = vec![0; shape.len()];
    let mut count = 0;
    loop {
        let mut procs: Vec<&[Event]> = pick
            .iter()
            .zip(&per)
            .map(|(i, p)| p[*i].as_slice())
            .collect();
        let mut hs = Vec::new();
        interleave(&mut registry(kind, shape.len() as u32), &mut procs, &mut hs);
        for h in &hs {
            agrees_with_oracle(h).unwrap_or_else(|e| panic!("{e}: {h:?}"));
        }
        count += hs.len();
        let mut j = 0;
        loop {
            if j == pick.len() {
                return count;
            }
            pick[j] += 1;
            if pick[j] < per[j].len() {
                break;
            }
            pick[j] = 0;
            j += 1;
        }
    }
}

#[test]
fn exhaustive_small_register_histories() {
    let n = exhaustive(Kind::Register, &[2, 2]) + exhaustive(Kind::Register, &[1, 1, 1]);
    assert!(n > 100_000);
}

#[test]
fn exhaustive_small_queue_histories() {
    let n = exhaustive(Kind::Queue, &[2, 2]) + exhaustive(Kind::Queue, &[1, 1, 1]);
    assert!(n > 100_000);
}

/// Run again by the workspace acceptance test.
#[allow(dead_code)]
pub const SUITE: &[(&str, fn())] = &[
    (
        "register_histories_match_permutation_search",
        register_histories_match_permutation_search,
    ),
    (
        "queue_histories_match_permutation_search",
        queue_histories_match_permutation_search,
    ),
    (
        "exhaustive_small_register_histories",
        exhaustive_small_register_histories,
    ),
    (
        "exhaustive_small_queue_histories",
        exhaustive_small_queue_histories,
    ),
];
