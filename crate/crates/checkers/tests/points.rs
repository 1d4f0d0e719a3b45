mod common;

use std::collections::BTreeMap;

use common::{arb_algorithm, arb_history, registry, specs_of, tree_of, Kind};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use slin_checkers::{
    check_strong_lin, extract_linearization_points, linearization_from_points, linearize_one,
    HistoryTree, OpKey, PointMap,
};
use slin_engine::{AdversaryClass, SeededRandom};
use slin_history::{History, ObjectId, ProcessId, SeqSpec, StepKind, Time, TimedExecution, Value};

fn t(n: i64, d: i64) -> Time {
    Time::new(n, d)
}

fn keys(h: &History) -> Vec<OpKey> {
    let mut n: BTreeMap<ProcessId, usize> = BTreeMap::new();
    h.operations()
        .iter()
        .map(|op| {
            let k = n.entry(op.process).or_insert(0);
            *k += 1;
            OpKey {
                process: op.process,
                ordinal: *k - 1,
            }
        })
        .collect()
}

/// Write by p0 overlapping a read by p1 returning `read`, at times 0, 4, 5, 10.
fn overlap(read: i64) -> TimedExecution {
    let mut h = registry(Kind::Register, 2);
    h.push(
        StepKind::Inv,
        ProcessId(0),
        ObjectId(0),
        "write",
        Value::Tuple(vec![Value::Int(1)]),
    );
    h.push(
        StepKind::Inv,
        ProcessId(1),
        ObjectId(0),
        "read",
        Value::Tuple(vec![]),
    );
    h.push(
        StepKind::Rsp,
        ProcessId(0),
        ObjectId(0),
        "write",
        Value::Unit,
    );
    h.push(
        StepKind::Rsp,
        ProcessId(1),
        ObjectId(0),
        "read",
        Value::Int(read),
    );
    TimedExecution::new(&h, vec![t(0, 1), t(4, 1), t(5, 1), t(10, 1)]).unwrap()
}

fn key(p: u32) -> OpKey {
    OpKey {
        process: ProcessId(p),
        ordinal: 0,
    }
}

#[test]
fn solo_operation_gets_its_invocation_time() {
    let mut h = registry(Kind::Register, 1);
    h.push_atomic(
        ProcessId(0),
        ObjectId(0),
        "write",
        vec![Value::Int(2)],
        Value::Unit,
    );
    let e = TimedExecution::new(&h, vec![t(0, 1), t(1, 1)]).unwrap();
    let pts = extract_linearization_points(&e, &h, &h.specs()).unwrap();
    assert_eq!(pts[&key(0)], Some(t(0, 1)));
}

#[test]
fn overlapping_operations() {
    // read sees the write: write at its invocation, read at its own (4 > T*(0) = 2)
    let e = overlap(1);
    let specs = e.history().specs();
    let img = linearize_one(&e.history(), &specs).unwrap().unwrap();
    let pts = extract_linearization_points(&e, &img, &specs).unwrap();
    assert_eq!(pts[&key(0)], Some(t(0, 1)));
    assert_eq!(pts[&key(1)], Some(t(4, 1)));

    // read misses it: read at 4, write at T*(4) = 9/2
    let e = overlap(0);
    let img = linearize_one(&e.history(), &specs).unwrap().unwrap();
    let pts = extract_linearization_points(&e, &img, &specs).unwrap();
    assert_eq!(pts[&key(1)], Some(t(4, 1)));
    assert_eq!(pts[&key(0)], Some(t(9, 2)));
}

#[test]
fn pending_operations_outside_the_image_are_unbounded() {
    let e = overlap(0).prefix(3);
    let specs = e.history().specs();
    let mut img = e.history().empty_like();
    img.push_atomic(
        ProcessId(0),
        ObjectId(0),
        "write",
        vec![Value::Int(1)],
        Value::Unit,
    );
    let pts = extract_linearization_points(&e, &img, &specs).unwrap();
    assert_eq!(pts[&key(0)], Some(t(0, 1)));
    assert_eq!(pts[&key(1)], None);
}

#[test]
fn successor_of_the_last_step_is_one_unit_on() {
    let e = overlap(0).prefix(2);
    let specs = e.history().specs();
    let mut img = e.history().empty_like();
    img.push_atomic(ProcessId(1), ObjectId(0), "read", vec![], Value::Int(0));
    img.push_atomic(
        ProcessId(0),
        ObjectId(0),
        "write",
        vec![Value::Int(1)],
        Value::Unit,
    );
    let pts = extract_linearization_points(&e, &img, &specs).unwrap();
    assert_eq!(pts[&key(1)], Some(t(4, 1)));
    assert_eq!(pts[&key(0)], Some(t(5, 1)));
}

#[test]
fn non_linearizations_are_rejected() {
    let e = overlap(1);
    let specs = e.history().specs();
    let mut img = e.history().empty_like();
    img.push_atomic(ProcessId(1), ObjectId(0), "read", vec![], Value::Int(1));
    img.push_atomic(
        ProcessId(0),
        ObjectId(0),
        "write",
        vec![Value::Int(1)],
        Value::Unit,
    );
    assert!(extract_linearization_points(&e, &img, &specs).is_err());
}

/// Checks (a), (b) and the round trip through `L(E, pt)`.
fn check_points(
    e: &TimedExecution,
    img: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<PointMap, TestCaseError> {
    let pts = extract_linearization_points(e, img, specs).unwrap();
    let h = e.history();
    let in_image: Vec<OpKey> = keys(img);
    for (k, op) in keys(&h).into_iter().zip(h.operations()) {
        let pt = pts[&k];
        if !in_image.contains(&k) {
            prop_assert_eq!(pt, None);
            continue;
        }
        let pt = pt.unwrap();
        prop_assert!(e.time(op.inv_index) <= pt);
        if let Some(r) = op.rsp_index {
            prop_assert!(pt <= e.time(r));
        }
    }
    let seq: Vec<Time> = in_image.iter().map(|k| pts[k].unwrap()).collect();
    prop_assert!(seq.windows(2).all(|w| w[0] < w[1]));
    let l = linearization_from_points(e, img, &pts).unwrap();
    prop_assert!(l.history().same_events(img));
    Ok(pts)
}

/// Points of `d`, a prefix of `e`, agree with those of `e` up to `d`'s last
/// step; everything `e` adds to the image comes later.
fn check_prefix(
    d: &TimedExecution,
    img_d: &History,
    pd: &PointMap,
    img_e: &History,
    pe: &PointMap,
) -> Result<(), TestCaseError> {
    let kd = keys(img_d);
    let ke = keys(img_e);
    prop_assert_eq!(&ke[..kd.len()], &kd[..]);
    let last = d.pairs.last().map(|(_, t)| *t);
    for k in &kd {
        if last.is_some_and(|l| pd[k].unwrap() <= l) {
            prop_assert_eq!(pd[k], pe[k]);
        }
    }
    if let (Some(a), Some(b)) = (kd.last(), ke.get(kd.len())) {
        prop_assert!(pe[a].unwrap() < pe[b].unwrap());
    }
    Ok(())
}

fn check_tree(
    tree: &HistoryTree,
    specs: &BTreeMap<ObjectId, SeqSpec>,
    times: impl Fn(&History) -> TimedExecution,
) -> Result<(), TestCaseError> {
    let Some(w) = check_strong_lin(tree, specs).unwrap() else {
        return Ok(());
    };
    let mut pts = Vec::new();
    for v in 0..tree.len() {
        let e = times(&tree.history(v));
        pts.push(check_points(&e, w.image(v).unwrap(), specs)?);
    }
    for v in 1..tree.len() {
        let u = tree.node(v).parent.unwrap();
        let d = times(&tree.history(u));
        check_prefix(
            &d,
            w.image(u).unwrap(),
            &pts[u],
            w.image(v).unwrap(),
            &pts[v],
        )?;
    }
    Ok(())
}

/// Step times with gaps drawn from `gaps`, in halves.
fn spaced(h: &History, gaps: &[i64]) -> TimedExecution {
    let mut now = Time::from_integer(0);
    let times = (0..h.steps.len())
        .map(|i| {
            if i > 0 {
                now += t(gaps[i % gaps.len()], 2);
            }
            now
        })
        .collect();
    TimedExecution::new(h, times).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn points_on_single_histories(
        h in prop_oneof![arb_history(Kind::Register), arb_history(Kind::Queue)],
        gaps in prop::collection::vec(1i64..6, 1..12),
    ) {
        let specs = h.specs();
        let tree = HistoryTree::from_histories(std::slice::from_ref(&h)).unwrap();
        check_tree(&tree, &specs, |p| spaced(p, &gaps))?;
    }

    #[test]
    fn points_on_engine_trees((alg, horizon) in arb_algorithm(), seed in any::<u64>()) {
        let (tree, runs) = tree_of(&alg, || SeededRandom::new(AdversaryClass::Strong, seed), horizon);
        check_tree(&tree, &specs_of(&runs), TimedExecution::from_history)?;
    }
}

/// Run again by the workspace acceptance test.
#[allow(dead_code)]
pub const SUITE: &[(&str, fn())] = &[
    ("points_on_single_histories", points_on_single_histories),
    ("points_on_engine_trees", points_on_engine_trees),
];
