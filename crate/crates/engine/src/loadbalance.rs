//! The load-balancing algorithm and the adversary family `A_p`.
//!
//! Each of `n = m^2` processes picks a counter `F_i`, `i` uniform in `0..m`,
//! runs `F_i.fetch&inc`, then `F_i.fetch&dec`, and returns the first result.

use std::collections::BTreeSet;
use std::sync::Arc;

use slin_history::{ProcessId, SeqSpec, StepKind, Value};
use slin_objects::counter::{llsc_strong_counter, writefirst_strong_counter};

use crate::adversary::{Adversary, AdversaryClass, View};
use crate::algorithm::{process, AlgorithmSpec, ObjectDecl, ProgramAction};
use crate::sim::{ProcInfo, RunRecord};
use crate::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CounterKind {
    Atomic,
    Llsc,
    WriteFirst,
}

impl CounterKind {
    pub fn name(self) -> &'static str {
        match self {
            CounterKind::Atomic => "atomic",
            CounterKind::Llsc => "llsc",
            CounterKind::WriteFirst => "writefirst",
        }
    }

    pub fn is_implemented(self) -> bool {
        self != CounterKind::Atomic
    }
}

pub fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `n` processes over `√n` counters; coins are drawn from `0..√n`.
pub fn loadbalance(n: usize, kind: CounterKind) -> Result<AlgorithmSpec, EngineError> {
    let m = isqrt(n);
    if n == 0 || m * m != n {
        return Err(EngineError::NotSquare(n));
    }
    let objects = (0..m)
        .map(|i| {
            let name = format!("F{i}");
            match kind {
                CounterKind::Atomic => {
                    ObjectDecl::atomic(name, SeqSpec::StrongCounter { initial: 0 })
                }
                CounterKind::Llsc => ObjectDecl::implemented(name, Arc::new(llsc_strong_counter())),
                CounterKind::WriteFirst => {
                    ObjectDecl::implemented(name, Arc::new(writefirst_strong_counter(n)))
                }
            }
        })
        .collect();
    let program = Arc::new(|r: &[Value]| {
        let counter = || r[0].as_int().unwrap_or(0) as usize;
        match r.len() {
            0 => ProgramAction::Flip,
            1 => ProgramAction::invoke(counter(), "fetch&inc", vec![]),
            2 => ProgramAction::invoke(counter(), "fetch&dec", vec![]),
            _ => ProgramAction::Done(r[1].clone()),
        }
    });
    Ok(AlgorithmSpec {
        processes: (0..n)
            .map(|p| process(format!("p{p}"), program.clone()))
            .collect(),
        objects,
        omega: (0..m as i64).map(Value::Int).collect(),
    })
}

/// The counter a process chose, once it has flipped.
pub fn chosen(info: &ProcInfo) -> Option<usize> {
    info.responses.first()?.as_int().map(|c| c as usize)
}

/// Whether the process's fetch&inc has returned.
pub fn fai_done(info: &ProcInfo) -> bool {
    info.responses.len() >= 2
}

/// The value returned by the process's fetch&inc.
pub fn fai_value(info: &ProcInfo) -> Option<i64> {
    info.responses.get(1)?.as_int()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApCase {
    /// p is visible at the end of the first phase.
    Visible,
    /// p is not.
    Hidden,
}

/// What `A_p` observed at the end of its first phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApReport {
    pub i_star: usize,
    /// Processes that chose `F_{i*}`, p included.
    pub p_star: BTreeSet<usize>,
    pub case: ApCase,
    /// p and the processes that see p (second case only).
    pub s_set: BTreeSet<usize>,
    /// Every member of `P_{i*}` made exactly one shared access and every other
    /// process halted.
    pub phase1_ok: bool,
}

#[derive(Clone, Debug)]
enum ApPhase {
    Target,
    Others(usize),
    Solo(usize),
    Rounds {
        order: Vec<usize>,
        cursor: usize,
        then_p: bool,
    },
    FinishP,
    Done,
}

/// The weak adversary `A_p`.
///
/// Phase one runs p up to its first shared access, then every other process
/// up to its first one: processes on a different counter run solo to
/// completion, the rest stall. In the resulting configuration, if p is
/// visible, the processes of `P_{i*}` whose first access was a write run
/// round-robin until each has finished its fetch&inc. Otherwise the members
/// of `P_{i*}` outside `S` do so, and then p runs until its own fetch&inc
/// returns. Processes are stopped once their fetch&inc returns.
#[derive(Clone, Debug)]
pub struct AdversaryAp {
    p: usize,
    phase: ApPhase,
    report: Option<ApReport>,
}

impl AdversaryAp {
    pub fn new(p: usize, n: usize) -> Result<Self, EngineError> {
        if p >= n {
            return Err(EngineError::InvalidTarget(p));
        }
        Ok(AdversaryAp {
            p,
            phase: ApPhase::Target,
            report: None,
        })
    }

    pub fn report(&self) -> Option<&ApReport> {
        self.report.as_ref()
    }

    fn configuration_c(&mut self, view: &View<'_>) {
        let o = view.observed();
        let procs = o.procs;
        let i_star = chosen(&procs[self.p]).unwrap_or(0);
        let p_star: BTreeSet<usize> = (0..procs.len())
            .filter(|q| chosen(&procs[*q]) == Some(i_star))
            .collect();
        let phase1_ok = (0..procs.len()).all(|q| {
            if p_star.contains(&q) {
                procs[q].shared_accesses == 1
            } else {
                procs[q].halted
            }
        });
        let pid = ProcessId(self.p as u32);
        let (case, s_set, order, then_p) = if o.marks.is_visible(pid) {
            let w: Vec<usize> = p_star
                .iter()
                .copied()
                .filter(|q| {
                    procs[*q]
                        .first_access
                        .as_ref()
                        .is_some_and(|(_, op)| op == "write")
                })
                .collect();
            (ApCase::Visible, BTreeSet::new(), w, false)
        } else {
            let mut s: BTreeSet<usize> = o.marks.seen_by(pid).map(|q| q.index()).collect();
            s.insert(self.p);
            let order = p_star.difference(&s).copied().collect();
            (ApCase::Hidden, s, order, true)
        };
        self.report = Some(ApReport {
            i_star,
            p_star,
            case,
            s_set,
            phase1_ok,
        });
        self.phase = ApPhase::Rounds {
            order,
            cursor: 0,
            then_p,
        };
    }
}

impl Adversary for AdversaryAp {
    fn class(&self) -> AdversaryClass {
        AdversaryClass::Weak
    }

    fn next(&mut self, view: &View<'_>) -> Option<ProcessId> {
        let n = view.process_count;
        loop {
            let procs = view.observed().procs;
            match self.phase.clone() {
                ApPhase::Target => {
                    if procs[self.p].shared_accesses == 0 && !procs[self.p].halted {
                        return Some(ProcessId(self.p as u32));
                    }
                    self.phase = ApPhase::Others(0);
                }
                ApPhase::Others(q) if q >= n => self.configuration_c(view),
                ApPhase::Others(q) if q == self.p => self.phase = ApPhase::Others(q + 1),
                ApPhase::Others(q) => {
                    let info = &procs[q];
                    if info.shared_accesses == 0 && !info.halted {
                        return Some(ProcessId(q as u32));
                    }
                    if chosen(info) != chosen(&procs[self.p]) {
                        self.phase = ApPhase::Solo(q);
                    } else {
                        self.phase = ApPhase::Others(q + 1);
                    }
                }
                ApPhase::Solo(q) => {
                    if !procs[q].halted {
                        return Some(ProcessId(q as u32));
                    }
                    self.phase = ApPhase::Others(q + 1);
                }
                ApPhase::Rounds {
                    order,
                    cursor,
                    then_p,
                } => {
                    let live: Vec<usize> = order
                        .iter()
                        .copied()
                        .filter(|q| !fai_done(&procs[*q]) && !procs[*q].halted)
                        .collect();
                    if live.is_empty() {
                        self.phase = if then_p {
                            ApPhase::FinishP
                        } else {
                            ApPhase::Done
                        };
                        continue;
                    }
                    // next live process at or after the cursor, in id order
                    let q = live
                        .iter()
                        .copied()
                        .find(|q| *q >= cursor)
                        .unwrap_or(live[0]);
                    self.phase = ApPhase::Rounds {
                        order,
                        cursor: q + 1,
                        then_p,
                    };
                    return Some(ProcessId(q as u32));
                }
                ApPhase::FinishP => {
                    if !fai_done(&procs[self.p]) && !procs[self.p].halted {
                        return Some(ProcessId(self.p as u32));
                    }
                    self.phase = ApPhase::Done;
                }
                ApPhase::Done => return None,
            }
        }
    }
}

/// Checks the lower-bound helper claim on a finished `A_p` run: take as `P`
/// the processes other than p whose fetch&inc on `F_{i*}` returned, shrink it
/// until none of them sees a process outside it, and require p's result to be
/// at least `|P|`. `None` when the premises do not apply.
pub fn lb_helper_holds(rec: &RunRecord, p: usize, i_star: usize) -> Option<bool> {
    let target = slin_history::ObjectId(i_star as u32);
    let p_value = fai_value(&rec.procs[p])?;
    let any_dec = rec
        .history
        .steps
        .iter()
        .any(|s| s.kind == StepKind::Inv && s.object == target && s.op == "fetch&dec");
    if any_dec {
        return None;
    }
    let mut set: BTreeSet<usize> = (0..rec.procs.len())
        .filter(|q| *q != p && chosen(&rec.procs[*q]) == Some(i_star) && fai_done(&rec.procs[*q]))
        .collect();
    loop {
        let bad: Vec<usize> = set
            .iter()
            .copied()
            .filter(|q| {
                rec.marks
                    .sees_pairs()
                    .iter()
                    .any(|(a, b)| a.index() == *q && !set.contains(&b.index()))
            })
            .collect();
        if bad.is_empty() {
            break;
        }
        for q in bad {
            set.remove(&q);
        }
    }
    Some(p_value >= set.len() as i64)
}
