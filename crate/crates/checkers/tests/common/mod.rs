#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use slin_checkers::HistoryTree;
use slin_engine::enumerate::all_runs;
use slin_engine::{process, straight_line, Adversary, AlgorithmSpec, ObjectDecl, RunRecord, Stmt};
use slin_history::{
    happens_before, History, ObjectId, ObjectInfo, ProcessId, SeqSpec, StepKind, Value,
};
use slin_objects::cas::cas_from_registers;
use slin_objects::mutex::mutex_wrapped;
use slin_objects::queue::herlihy_wing_queue;

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Register,
    Queue,
}

pub fn registry(kind: Kind, procs: u32) -> History {
    let spec = match kind {
        Kind::Register => SeqSpec::Register { initial: 0.into() },
        Kind::Queue => SeqSpec::Queue,
    };
    History::new(
        (0..procs).map(ProcessId),
        [ObjectInfo::base(ObjectId(0), "X", spec)],
    )
}

/// (op, args, response) for one generated operation.
fn arb_op(kind: Kind) -> impl Strategy<Value = (&'static str, Vec<Value>, Value)> {
    match kind {
        Kind::Register => prop_oneof![
            (1i64..=2).prop_map(|v| ("write", vec![Value::Int(v)], Value::Unit)),
            (0i64..=2).prop_map(|r| ("read", vec![], Value::Int(r))),
        ]
        .boxed(),
        Kind::Queue => prop_oneof![
            (1i64..=2).prop_map(|v| ("enqueue", vec![Value::Int(v)], Value::Unit)),
            prop_oneof![Just(Value::Empty), Just(Value::Int(1)), Just(Value::Int(2))]
                .prop_map(|r| ("dequeue", vec![], r)),
        ]
        .boxed(),
    }
}

/// Concurrent histories of 2 or 3 processes with at most two operations each;
/// a process's last operation may be left pending.
pub fn arb_history(kind: Kind) -> impl Strategy<Value = History> {
    (2u32..=3)
        .prop_flat_map(move |n| {
            (
                Just(n),
                prop::collection::vec(
                    (
                        prop::collection::vec(arb_op(kind), 1..=2),
                        prop::bool::weighted(0.3),
                    ),
                    n as usize,
                ),
                prop::collection::vec(0u32..3, 16),
            )
        })
        .prop_map(move |(n, procs, choices)| {
            let mut events: Vec<Vec<(StepKind, &'static str, Value)>> = procs
                .iter()
                .map(|(ops, pending)| {
                    let mut ev = Vec::new();
                    for (op, args, ret) in ops {
                        ev.push((StepKind::Inv, *op, Value::Tuple(args.clone())));
                        ev.push((StepKind::Rsp, *op, ret.clone()));
                    }
                    if *pending {
                        ev.pop();
                    }
                    ev.reverse();
                    ev
                })
                .collect();
            let mut h = registry(kind, n);
            let mut pick = choices.into_iter().cycle();
            while events.iter().any(|e| !e.is_empty()) {
                let mut p = (pick.next().unwrap() % n) as usize;
                while events[p].is_empty() {
                    p = (p + 1) % n as usize;
                }
                let (k, op, payload) = events[p].pop().unwrap();
                h.push(k, ProcessId(p as u32), ObjectId(0), op, payload);
            }
            h
        })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Tries every subset of pending operations and every order.
pub fn naive_linearizable(h: &History, specs: &BTreeMap<ObjectId, SeqSpec>) -> bool {
    let ops = h.operations();
    let complete: Vec<usize> = (0..ops.len()).filter(|i| ops[*i].is_complete()).collect();
    let pending: Vec<usize> = (0..ops.len()).filter(|i| !ops[*i].is_complete()).collect();
    for mask in 0..(1u32 << pending.len()) {
        let mut chosen = complete.clone();
        chosen.extend(
            (0..pending.len())
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| pending[j]),
        );
        'order: for order in permutations(&chosen) {
            for a in 0..order.len() {
                for b in a + 1..order.len() {
                    if happens_before(&ops[order[b]], &ops[order[a]]) {
                        continue 'order;
                    }
                }
            }
            let mut states = BTreeMap::new();
            for &i in &order {
                let op = &ops[i];
                let spec = &specs[&op.object];
                let st = states
                    .entry(op.object)
                    .or_insert_with(|| spec.initial_state());
                let Ok((next, r)) = spec.apply(st, op.process, &op.op, &op.args) else {
                    continue 'order;
                };
                if op.ret.as_ref().is_some_and(|x| *x != r) {
                    continue 'order;
                }
                *st = next;
            }
            return true;
        }
    }
    false
}

/// The tree of the interpreted histories over every coin vector of length
/// `horizon`, each run driven by a fresh adversary.
pub fn tree_of<A: Adversary>(
    alg: &AlgorithmSpec,
    make: impl Fn() -> A,
    horizon: usize,
) -> (HistoryTree, Vec<(Vec<Value>, RunRecord)>) {
    let runs = all_runs(alg, make, horizon, 2_000).unwrap();
    (HistoryTree::from_runs(&runs).unwrap(), runs)
}

pub fn specs_of(runs: &[(Vec<Value>, RunRecord)]) -> BTreeMap<ObjectId, SeqSpec> {
    let mut specs = BTreeMap::new();
    for (_, r) in runs {
        specs.extend(r.history.specs());
    }
    specs
}

/// A small program over one shared object, drawn from a few implementations.
pub fn arb_algorithm() -> impl Strategy<Value = (AlgorithmSpec, usize)> {
    let object = prop_oneof![Just(0u8), Just(1), Just(2), Just(3)];
    let prog = prop::collection::vec((0u8..4, 0i64..3, prop::bool::weighted(0.4)), 1..=2);
    (object, prop::collection::vec(prog, 2..=3)).prop_map(|(o, progs)| {
        let flips = progs.iter().flatten().filter(|(_, _, f)| *f).count();
        let decl = match o {
            0 => ObjectDecl::implemented(
                "C",
                Arc::new(mutex_wrapped(SeqSpec::StrongCounter { initial: 0 })),
            ),
            1 => ObjectDecl::implemented("X", Arc::new(cas_from_registers(0.into()))),
            2 => ObjectDecl::implemented("Q", Arc::new(herlihy_wing_queue())),
            _ => ObjectDecl::atomic("Q", SeqSpec::Queue),
        };
        let processes = progs
            .into_iter()
            .enumerate()
            .map(|(p, ops)| {
                let mut stmts = Vec::new();
                for (kind, v, flip) in ops {
                    if flip {
                        stmts.push(Stmt::Flip);
                    }
                    stmts.push(match (o, kind % 2) {
                        (0, 0) => Stmt::call(0, "fetch&inc", vec![]),
                        (0, _) => Stmt::call(0, "fetch&dec", vec![]),
                        (1, 0) => {
                            Stmt::call(0, "CAS", vec![Value::Int(v), Value::Int(p as i64 + 1)])
                        }
                        (1, _) => Stmt::call(0, "read", vec![]),
                        (_, 0) => Stmt::call(0, "enqueue", vec![Value::Int(v)]),
                        (_, _) => Stmt::call(0, "dequeue", vec![]),
                    });
                }
                process(format!("p{p}"), straight_line(stmts))
            })
            .collect();
        let alg = AlgorithmSpec {
            processes,
            objects: vec![decl],
            omega: vec![0.into(), 1.into()],
        };
        (alg, flips)
    })
}
