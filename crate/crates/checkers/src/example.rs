//! The three-writer example: p, q and r each write a register, r then flips.
//! A strong adversary runs all three writes concurrently, lets r's write and
//! flip finish first, then completes p and q. One linearization per outcome
//! is fixed at the leaves.

use std::collections::BTreeMap;

use slin_engine::game::{solve, Producible};
use slin_engine::scenarios::three_writers;
use slin_engine::{AdversaryClass, AlgorithmSpec, CoinSource, RunRecord, Simulation};
use slin_history::{History, ObjectId, ProcessId, StepKind, Value};

use crate::tree::HistoryTree;
use crate::CheckError;

const P: ProcessId = ProcessId(0);
const Q: ProcessId = ProcessId(1);
const R: ProcessId = ProcessId(2);
const COIN_R: ObjectId = ObjectId(5);

fn registry() -> History {
    Simulation::new(
        &three_writers(),
        AdversaryClass::Strong,
        CoinSource::Vector(vec![]),
    )
    .history()
    .empty_like()
}

fn write_inv(h: &mut History, p: ProcessId) {
    h.push(
        StepKind::Inv,
        p,
        ObjectId(p.0),
        "write",
        Value::Tuple(vec![Value::Int(1)]),
    );
}

fn write_rsp(h: &mut History, p: ProcessId) {
    h.push(StepKind::Rsp, p, ObjectId(p.0), "write", Value::Unit);
}

fn atomic_write(h: &mut History, p: ProcessId) {
    h.push_atomic(p, ObjectId(p.0), "write", vec![Value::Int(1)], Value::Unit);
}

fn atomic_flip(h: &mut History, c: i64) {
    h.push_atomic(R, COIN_R, "flip", vec![], Value::Int(c));
}

/// The history for outcome `c`.
pub fn leaf_history(c: i64) -> History {
    let mut h = registry();
    write_inv(&mut h, P);
    write_inv(&mut h, Q);
    write_inv(&mut h, R);
    write_rsp(&mut h, R);
    h.push(StepKind::Inv, R, COIN_R, "flip", Value::Tuple(vec![]));
    h.push(StepKind::Rsp, R, COIN_R, "flip", Value::Int(c));
    write_rsp(&mut h, P);
    write_rsp(&mut h, Q);
    h
}

/// The tree of all prefixes of both outcome histories.
pub fn tree() -> HistoryTree {
    HistoryTree::from_histories(&[leaf_history(0), leaf_history(1)]).expect("well-formed histories")
}

/// The fixed leaf linearizations, keyed by leaf node id: outcome 0 orders r,
/// p, q and then the flip; outcome 1 orders r, the flip, q and then p.
pub fn printed_leaf_images(tree: &HistoryTree) -> BTreeMap<usize, History> {
    let mut out = BTreeMap::new();
    for c in [0, 1] {
        let leaf = tree.locate(&leaf_history(c)).expect("leaf is in the tree");
        let mut img = registry();
        atomic_write(&mut img, R);
        if c == 0 {
            atomic_write(&mut img, P);
            atomic_write(&mut img, Q);
            atomic_flip(&mut img, 0);
        } else {
            atomic_flip(&mut img, 1);
            atomic_write(&mut img, Q);
            atomic_write(&mut img, P);
        }
        out.insert(leaf, img);
    }
    out
}

/// Whether one strong adversary running `alg` produces, on every coin
/// outcome, an interpreted history equal to one of `images`. Decided by
/// exhausting the adversary's choices.
pub fn jointly_producible(
    alg: &AlgorithmSpec,
    images: &[History],
    limit: usize,
) -> Result<bool, CheckError> {
    let accept = |rec: &RunRecord| {
        let h = rec.history.interpret();
        images.iter().any(|img| img.same_events(&h))
    };
    Ok(solve(
        alg,
        AdversaryClass::Strong,
        &Producible { accept },
        limit,
    )?)
}
