mod common;

use std::sync::Arc;

use common::{specs_of, tree_of};
use proptest::prelude::*;
use slin_checkers::{
    check_locality, check_strong_lin, validate_witness, CheckError, HistoryTree, Locality,
};
use slin_engine::scenarios::{hw_queue, hw_strong_script, Variant};
use slin_engine::{
    process, straight_line, AdversaryClass, AlgorithmSpec, ObjectDecl, SeededRandom, Stmt,
};
use slin_history::{ObjectId, SeqSpec, Value};
use slin_objects::mutex::mutex_wrapped;

fn counter(name: &str) -> ObjectDecl {
    ObjectDecl::implemented(
        name,
        Arc::new(mutex_wrapped(SeqSpec::StrongCounter { initial: 0 })),
    )
}

/// Processes issuing fetch&inc or fetch&dec on one of two counters, with
/// optional flips between calls.
fn arb_composed() -> impl Strategy<Value = (AlgorithmSpec, usize)> {
    let call = (0usize..2, prop::bool::ANY, prop::bool::weighted(0.4));
    prop::collection::vec(prop::collection::vec(call, 1..=2), 2..=3).prop_map(|progs| {
        let flips = progs.iter().flatten().filter(|(_, _, f)| *f).count();
        let processes = progs
            .into_iter()
            .enumerate()
            .map(|(p, calls)| {
                let mut stmts = Vec::new();
                for (o, inc, flip) in calls {
                    if flip {
                        stmts.push(Stmt::Flip);
                    }
                    let op = if inc { "fetch&inc" } else { "fetch&dec" };
                    stmts.push(Stmt::call(o, op, vec![]));
                }
                process(format!("p{p}"), straight_line(stmts))
            })
            .collect();
        let alg = AlgorithmSpec {
            processes,
            objects: vec![counter("C0"), counter("C1")],
            omega: vec![0.into(), 1.into()],
        };
        (alg, flips)
    })
}

fn per_object(
    runs: &[(Vec<Value>, slin_engine::RunRecord)],
    objects: &[u32],
) -> Vec<(ObjectId, HistoryTree)> {
    objects
        .iter()
        .map(|o| {
            (
                ObjectId(*o),
                HistoryTree::from_object_runs(runs, ObjectId(*o)).unwrap(),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composed_counters_have_combined_witnesses((alg, flips) in arb_composed(), seed in any::<u64>()) {
        let (tree, runs) = tree_of(&alg, || SeededRandom::new(AdversaryClass::Strong, seed), flips);
        let specs = specs_of(&runs);
        match check_locality(&per_object(&runs, &[0, 1]), &tree, &specs).unwrap() {
            Locality::Holds(w) => prop_assert!(validate_witness(&tree, &w, &specs).is_ok()),
            other => prop_assert!(false, "unexpected verdict {:?}", other),
        }
    }
}

#[test]
fn single_object_reduces_to_the_strong_checker() {
    let alg = AlgorithmSpec {
        processes: vec![
            process(
                "a",
                straight_line(vec![Stmt::call(0, "fetch&inc", vec![]), Stmt::Flip]),
            ),
            process(
                "b",
                straight_line(vec![Stmt::Flip, Stmt::call(0, "fetch&dec", vec![])]),
            ),
        ],
        objects: vec![counter("C")],
        omega: vec![0.into(), 1.into()],
    };
    for seed in 0..10 {
        let (tree, runs) = tree_of(&alg, || SeededRandom::new(AdversaryClass::Strong, seed), 2);
        let specs = specs_of(&runs);
        let verdict = check_locality(&per_object(&runs, &[0]), &tree, &specs).unwrap();
        assert!(matches!(verdict, Locality::Holds(_)));
        assert!(check_strong_lin(&tree, &specs).unwrap().is_some());
    }
}

#[test]
fn failing_projection_claims_nothing() {
    let (tree, runs) = tree_of(&hw_queue(Variant::Implemented), hw_strong_script, 1);
    let specs = specs_of(&runs);
    let verdict = check_locality(&per_object(&runs, &[0]), &tree, &specs).unwrap();
    assert_eq!(
        verdict,
        Locality::NotApplicable {
            failing: vec![ObjectId(0)]
        }
    );
}

#[test]
fn mismatched_projection_is_an_error() {
    let alg = AlgorithmSpec {
        processes: vec![
            process(
                "a",
                straight_line(vec![Stmt::call(0, "fetch&inc", vec![]), Stmt::Flip]),
            ),
            process("b", straight_line(vec![Stmt::call(1, "fetch&inc", vec![])])),
        ],
        objects: vec![counter("C0"), counter("C1")],
        omega: vec![0.into(), 1.into()],
    };
    let (tree, runs) = tree_of(&alg, || SeededRandom::new(AdversaryClass::Strong, 0), 1);
    let specs = specs_of(&runs);
    // the trees are swapped
    let swapped: Vec<(ObjectId, HistoryTree)> = per_object(&runs, &[1, 0])
        .into_iter()
        .zip([ObjectId(0), ObjectId(1)])
        .map(|((_, t), o)| (o, t))
        .collect();
    assert!(matches!(
        check_locality(&swapped, &tree, &specs),
        Err(CheckError::ProjectionMismatch(_))
    ));
    let empty = vec![(ObjectId(0), HistoryTree::new(tree.registry()))];
    assert!(matches!(
        check_locality(&empty, &tree, &specs),
        Err(CheckError::ProjectionMismatch(_))
    ));
}

/// Run again by the workspace acceptance test.
#[allow(dead_code)]
pub const SUITE: &[(&str, fn())] = &[(
    "composed_counters_have_combined_witnesses",
    composed_counters_have_combined_witnesses,
)];
