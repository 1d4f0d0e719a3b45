//! The small example algorithms, their payoffs and hand-built schedules.

use std::sync::Arc;

use num_rational::Rational64;
use slin_history::{SeqSpec, Value};
use slin_objects::mrsw::vitanyi_awerbuch_mrsw;
use slin_objects::mutex::mutex_wrapped;
use slin_objects::queue::herlihy_wing_queue;
use slin_objects::snapshot::aadgms_snapshot;
use slin_objects::srsw::vidyasankar_register;

use crate::adversary::{AdversaryClass, ScheduleScript};
use crate::algorithm::{process, straight_line, AlgorithmSpec, ObjectDecl, ProgramAction, Stmt};
use crate::sim::RunRecord;

/// Whether the shared object is atomic or built from base objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Atomic,
    Implemented,
}

fn ints(v: &[i64]) -> Vec<Value> {
    v.iter().map(|x| Value::Int(*x)).collect()
}

fn int_of(v: Option<&Value>) -> i64 {
    v.and_then(Value::as_int).unwrap_or(0)
}

/// p: scan; q: update(6), flip c in {-1,1}, update(8c); r: update(2), update(0).
pub fn snapshot(variant: Variant) -> AlgorithmSpec {
    let obj = match variant {
        Variant::Atomic => ObjectDecl::atomic(
            "S",
            SeqSpec::Snapshot {
                initial: ints(&[0, 0, 0]),
            },
        ),
        Variant::Implemented => ObjectDecl::implemented("S", Arc::new(aadgms_snapshot(3))),
    };
    AlgorithmSpec {
        processes: vec![
            process("p", straight_line(vec![Stmt::call(0, "scan", vec![])])),
            process(
                "q",
                straight_line(vec![
                    Stmt::call(0, "update", ints(&[6])),
                    Stmt::Flip,
                    Stmt::call_with(0, "update", |r| vec![Value::Int(8 * int_of(r.get(1)))]),
                ]),
            ),
            process(
                "r",
                straight_line(vec![
                    Stmt::call(0, "update", ints(&[2])),
                    Stmt::call(0, "update", ints(&[0])),
                ]),
            ),
        ],
        objects: vec![obj],
        omega: ints(&[-1, 1]),
    }
}

/// Sum of the components returned by p's scan.
pub fn snapshot_payoff(rec: &RunRecord) -> Rational64 {
    let sum = rec
        .returned(0)
        .and_then(Value::as_tuple)
        .map(|t| t.iter().filter_map(Value::as_int).sum())
        .unwrap_or(0);
    Rational64::from_integer(sum)
}

/// The weak schedule against the double-collect snapshot: p's scan sees r's
/// first update in one collect only when q's flip came out 1.
pub fn snapshot_weak_script() -> ScheduleScript {
    ScheduleScript::new(AdversaryClass::Weak)
        .runs(&[], &[(0, 3), (2, 7), (2, 6), (1, 7), (1, 1)])
        .runs(&ints(&[1]), &[(1, 7), (0, 3), (2, 1), (0, 3)])
        .runs(&ints(&[-1]), &[(1, 7), (0, 3), (0, 3), (2, 1)])
}

/// A strong schedule for the atomic snapshot: scan before q's second update
/// iff the flip came out 1.
pub fn snapshot_strong_script() -> ScheduleScript {
    ScheduleScript::new(AdversaryClass::Strong)
        .segment(&[], &[2, 2, 1, 1])
        .segment(&ints(&[1]), &[0, 1])
        .segment(&ints(&[-1]), &[1, 0])
}

/// w: write(2), flip c in {0,2}, write(c); p: read. Domain {0,1,2}, initially 1.
pub fn srsw(variant: Variant) -> AlgorithmSpec {
    let obj = match variant {
        Variant::Atomic => ObjectDecl::atomic(
            "R",
            SeqSpec::BoundedRegister {
                bound: 2,
                initial: 1,
            },
        ),
        Variant::Implemented => ObjectDecl::implemented("R", Arc::new(vidyasankar_register(2, 1))),
    };
    AlgorithmSpec {
        processes: vec![
            process(
                "w",
                straight_line(vec![
                    Stmt::call(0, "write", ints(&[2])),
                    Stmt::Flip,
                    Stmt::call_with(0, "write", |r| vec![r[1].clone()]),
                ]),
            ),
            process("p", straight_line(vec![Stmt::call(0, "read", vec![])])),
        ],
        objects: vec![obj],
        omega: ints(&[0, 2]),
    }
}

/// The value returned by the reader.
pub fn srsw_payoff(rec: &RunRecord) -> Rational64 {
    Rational64::from_integer(int_of(rec.returned(1)))
}

/// The oblivious schedule: the reader's upward scan finds A[1] = 1 and stops
/// the writer's zeroing midway, then confirms downward after the flip.
pub fn srsw_oblivious_schedule() -> Vec<u32> {
    vec![1, 1, 0, 0, 0, 0, 0, 1]
}

/// w: write(1), flip c in {-1,1}, write(c); r1, r2: read. Initially 0.
pub fn mrsw(variant: Variant) -> AlgorithmSpec {
    let obj = match variant {
        Variant::Atomic => ObjectDecl::atomic("R", SeqSpec::Register { initial: 0.into() }),
        Variant::Implemented => {
            ObjectDecl::implemented("R", Arc::new(vitanyi_awerbuch_mrsw(2, 0.into())))
        }
    };
    let read = || straight_line(vec![Stmt::call(0, "read", vec![])]);
    AlgorithmSpec {
        processes: vec![
            process(
                "w",
                straight_line(vec![
                    Stmt::call(0, "write", ints(&[1])),
                    Stmt::Flip,
                    Stmt::call_with(0, "write", |r| vec![r[1].clone()]),
                ]),
            ),
            process("r1", read()),
            process("r2", read()),
        ],
        objects: vec![obj],
        omega: ints(&[-1, 1]),
    }
}

/// The value returned by r1.
pub fn mrsw_payoff(rec: &RunRecord) -> Rational64 {
    Rational64::from_integer(int_of(rec.returned(1)))
}

/// r1 reads the writer's cell early; the rest of the schedule depends on the
/// flip, which the adversary only needs after w has finished.
pub fn mrsw_weak_script() -> ScheduleScript {
    ScheduleScript::new(AdversaryClass::Weak)
        .runs(&[], &[(1, 1), (0, 2), (0, 1)])
        .runs(&ints(&[1]), &[(0, 2), (1, 4), (2, 5)])
        .runs(&ints(&[-1]), &[(0, 2), (2, 5), (1, 4)])
}

/// q0: enqueue(0); q1: enqueue(1); p: enqueue(2), flip c in {0,1}, three dequeues.
pub fn hw_queue(variant: Variant) -> AlgorithmSpec {
    let obj = match variant {
        Variant::Atomic => ObjectDecl::atomic("Q", SeqSpec::Queue),
        Variant::Implemented => ObjectDecl::implemented("Q", Arc::new(herlihy_wing_queue())),
    };
    let deq = || Stmt::call(0, "dequeue", vec![]);
    AlgorithmSpec {
        processes: vec![
            process(
                "q0",
                straight_line(vec![Stmt::call(0, "enqueue", ints(&[0]))]),
            ),
            process(
                "q1",
                straight_line(vec![Stmt::call(0, "enqueue", ints(&[1]))]),
            ),
            process(
                "p",
                straight_line(vec![
                    Stmt::call(0, "enqueue", ints(&[2])),
                    Stmt::Flip,
                    deq(),
                    deq(),
                    deq(),
                ]),
            ),
        ],
        objects: vec![obj],
        omega: ints(&[0, 1]),
    }
}

/// The three dequeue results of p together with its flip, if p got that far.
fn hw_outcome(rec: &RunRecord) -> Option<(&Value, &[Value])> {
    let r = rec.responses(2);
    (r.len() == 5).then(|| (&r[1], &r[2..]))
}

/// Conditions (a) no dequeue returns empty, (b) 1 is dequeued before 2 and
/// (c) the first dequeue returns the flip.
pub fn hw_goal(rec: &RunRecord, require_order: bool) -> bool {
    let Some((coin, deqs)) = hw_outcome(rec) else {
        return false;
    };
    let a = deqs.iter().all(|d| *d != Value::Empty);
    let pos = |v: i64| deqs.iter().position(|d| *d == Value::Int(v));
    let b = !require_order || matches!((pos(1), pos(2)), (Some(i), Some(j)) if i < j);
    let c = deqs[0] == *coin;
    a && b && c
}

pub fn hw_payoff(rec: &RunRecord) -> Rational64 {
    Rational64::from_integer(hw_goal(rec, true) as i64)
}

pub fn hw_payoff_without_order(rec: &RunRecord) -> Rational64 {
    Rational64::from_integer(hw_goal(rec, false) as i64)
}

/// Tail increments in the order q0, q1, p; q1 and p write before the flip,
/// and q0's write waits for the first dequeue iff the flip came out 1.
pub fn hw_weak_script() -> ScheduleScript {
    ScheduleScript::new(AdversaryClass::Weak)
        .runs(&[], &[(0, 1), (1, 2), (2, 2), (2, 1)])
        .runs(&ints(&[0]), &[(0, 1), (2, 9)])
        .runs(&ints(&[1]), &[(2, 3), (0, 1), (2, 6)])
}

/// The same schedule for a strong adversary, where the flip is a grant of its own
/// and each dequeue runs without interruption once started.
pub fn hw_strong_script() -> ScheduleScript {
    ScheduleScript::new(AdversaryClass::Strong)
        .runs(&[], &[(0, 1), (1, 2), (2, 2), (2, 1)])
        .runs(&ints(&[0]), &[(0, 1), (2, 9)])
        .runs(&ints(&[1]), &[(2, 3), (0, 1), (2, 6)])
}

/// p: write(R0, 1); q: write(R1, 1); r: write(R2, 1), flip c in {0,1}.
pub fn three_writers() -> AlgorithmSpec {
    let reg = |name: &str| ObjectDecl::atomic(name, SeqSpec::Register { initial: 0.into() });
    AlgorithmSpec {
        processes: vec![
            process("p", straight_line(vec![Stmt::call(0, "write", ints(&[1]))])),
            process("q", straight_line(vec![Stmt::call(1, "write", ints(&[1]))])),
            process(
                "r",
                straight_line(vec![Stmt::call(2, "write", ints(&[1])), Stmt::Flip]),
            ),
        ],
        objects: vec![reg("R0"), reg("R1"), reg("R2")],
        omega: ints(&[0, 1]),
    }
}

/// Two processes: fetch&inc, flip c in {0,1}, then fetch&inc if c = 0 and
/// fetch&dec otherwise; each returns its last result. The implemented counter
/// wraps a lock around the sequential object.
pub fn flip_counter(variant: Variant) -> AlgorithmSpec {
    let spec = SeqSpec::StrongCounter { initial: 0 };
    let obj = match variant {
        Variant::Atomic => ObjectDecl::atomic("C", spec),
        Variant::Implemented => ObjectDecl::implemented("C", Arc::new(mutex_wrapped(spec))),
    };
    let program = Arc::new(|r: &[Value]| match r.len() {
        0 => ProgramAction::invoke(0, "fetch&inc", vec![]),
        1 => ProgramAction::Flip,
        2 if r[1] == Value::Int(0) => ProgramAction::invoke(0, "fetch&inc", vec![]),
        2 => ProgramAction::invoke(0, "fetch&dec", vec![]),
        _ => ProgramAction::Done(r[2].clone()),
    });
    AlgorithmSpec {
        processes: vec![process("a", program.clone()), process("b", program)],
        objects: vec![obj],
        omega: ints(&[0, 1]),
    }
}
