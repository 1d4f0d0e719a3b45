//! The simulation: shared memory, per-process program state and the history.
//!
//! One grant is one base-level atomic step of the granted process. The
//! invocation of an implemented method is emitted with its first base step and
//! its response with its last one; a process halts as soon as its program
//! returns [`ProgramAction::Done`]. Under a weak adversary a flip grant also
//! carries the process's next invocation (and its response, when the target is
//! an atomic object).

use std::collections::BTreeMap;
use std::sync::Arc;

use slin_history::{History, ObjectId, ProcessId, SeqSpec, StepKind, Value};
use slin_objects::{BaseCall, Instance, Memory, MethodBody, MethodCall, MethodStep};

use crate::adversary::{Adversary, AdversaryClass, View};
use crate::algorithm::{AlgorithmSpec, Binding, ProgramAction};
use crate::marks::MarkState;
use crate::EngineError;

pub const DEFAULT_BUDGET: usize = 10_000;

/// Where flip outcomes come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoinSource {
    /// The i-th flip of the run returns `c[i]`.
    Vector(Vec<Value>),
    /// Process p's j-th flip returns `c[p][j]`.
    PerProcess(Vec<Vec<Value>>),
}

/// What an observing adversary may know about a process.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProcInfo {
    /// Responses of top-level operations, flips included.
    pub responses: Vec<Value>,
    pub started: bool,
    pub halted: bool,
    pub returned: Option<Value>,
    /// Inside an implemented method call.
    pub in_method: bool,
    /// Base operations on non-coin objects.
    pub shared_accesses: usize,
    /// Object and operation of the first such access.
    pub first_access: Option<(ObjectId, String)>,
}

#[derive(Clone, Debug)]
struct Method {
    object: ObjectId,
    op: String,
    body: Box<dyn MethodBody>,
    next: BaseCall,
}

#[derive(Clone, Debug)]
enum Status {
    Ready,
    InMethod(Method),
    Halted,
}

/// Everything a finished run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub history: History,
    /// Flip outcomes in the order they were consumed.
    pub coins: Vec<Value>,
    pub schedule: Vec<ProcessId>,
    pub max_point_contention: usize,
    pub procs: Vec<ProcInfo>,
    pub budget_exhausted: bool,
    pub marks: MarkState,
    /// Owning implemented object of every base object that has one.
    pub owners: BTreeMap<ObjectId, ObjectId>,
    pub coin_objects: Vec<ObjectId>,
}

impl RunRecord {
    pub fn responses(&self, p: usize) -> &[Value] {
        &self.procs[p].responses
    }

    pub fn returned(&self, p: usize) -> Option<&Value> {
        self.procs[p].returned.as_ref()
    }
}

#[derive(Clone)]
pub struct Simulation {
    alg: Arc<AlgorithmSpec>,
    class: AdversaryClass,
    memory: Memory,
    instances: BTreeMap<ObjectId, Instance>,
    coin_ids: Vec<ObjectId>,
    status: Vec<Status>,
    info: Vec<ProcInfo>,
    locals: BTreeMap<(ProcessId, ObjectId), Value>,
    history: History,
    marks: MarkState,
    coins: CoinSource,
    consumed: Vec<Value>,
    used_per_process: Vec<usize>,
    schedule: Vec<ProcessId>,
    active: usize,
    max_contention: usize,
    flips_seen: usize,
}

impl Simulation {
    pub fn new(alg: &AlgorithmSpec, class: AdversaryClass, coins: CoinSource) -> Self {
        Simulation::from_shared(Arc::new(alg.clone()), class, coins)
    }

    pub fn from_shared(alg: Arc<AlgorithmSpec>, class: AdversaryClass, coins: CoinSource) -> Self {
        let n = alg.processes.len();
        let mut memory = Memory::new();
        let mut pending = Vec::new();
        for decl in &alg.objects {
            match &decl.binding {
                Binding::Atomic(spec) => {
                    memory.alloc_base(decl.name.clone(), spec.clone(), None);
                }
                Binding::Implemented(imp) => {
                    let id = memory.reserve_implemented(decl.name.clone(), imp.spec());
                    pending.push((id, imp.clone()));
                }
            }
        }
        let coin_ids = (0..n)
            .map(|p| {
                memory.alloc_base(
                    format!("coin[{p}]"),
                    SeqSpec::Coin {
                        omega: alg.omega.clone(),
                    },
                    None,
                )
            })
            .collect();
        let instances = pending
            .into_iter()
            .map(|(id, imp)| (id, memory.instantiate(id, imp)))
            .collect();
        let history = History::new((0..n as u32).map(ProcessId), memory.infos().iter().cloned());
        let mut sim = Simulation {
            class,
            memory,
            instances,
            coin_ids,
            status: vec![Status::Ready; n],
            info: vec![ProcInfo::default(); n],
            locals: BTreeMap::new(),
            history,
            marks: MarkState::new(),
            coins,
            consumed: Vec::new(),
            used_per_process: vec![0; n],
            schedule: Vec::new(),
            active: 0,
            max_contention: 0,
            flips_seen: 0,
            alg,
        };
        for p in 0..n {
            if let ProgramAction::Done(v) = (sim.alg.processes[p].program)(&[]) {
                sim.status[p] = Status::Halted;
                sim.info[p].halted = true;
                sim.info[p].returned = Some(v);
            }
        }
        sim
    }

    pub fn class(&self) -> AdversaryClass {
        self.class
    }

    pub fn process_count(&self) -> usize {
        self.info.len()
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn marks(&self) -> &MarkState {
        &self.marks
    }

    pub fn procs(&self) -> &[ProcInfo] {
        &self.info
    }

    pub fn coins(&self) -> &CoinSource {
        &self.coins
    }

    pub fn consumed(&self) -> &[Value] {
        &self.consumed
    }

    pub fn grants(&self) -> usize {
        self.schedule.len()
    }

    pub fn all_halted(&self) -> bool {
        self.info.iter().all(|i| i.halted)
    }

    pub fn enabled(&self) -> Vec<ProcessId> {
        (0..self.info.len())
            .filter(|p| !self.info[*p].halted)
            .map(|p| ProcessId(p as u32))
            .collect()
    }

    /// Appends an outcome to a [`CoinSource::Vector`] source.
    pub fn push_coin(&mut self, c: Value) {
        if let CoinSource::Vector(v) = &mut self.coins {
            v.push(c);
        }
    }

    pub fn view(&self) -> View<'_> {
        View::new(self)
    }

    pub fn record(&self) -> RunRecord {
        let owners = self
            .memory
            .infos()
            .iter()
            .filter_map(|i| self.memory.owner(i.id).map(|o| (i.id, o)))
            .collect();
        RunRecord {
            history: self.history.clone(),
            coins: self.consumed.clone(),
            schedule: self.schedule.clone(),
            max_point_contention: self.max_contention,
            procs: self.info.clone(),
            budget_exhausted: false,
            marks: self.marks.clone(),
            owners,
            coin_objects: self.coin_ids.clone(),
        }
    }

    fn program(&self, p: usize) -> ProgramAction {
        (self.alg.processes[p].program)(&self.info[p].responses)
    }

    fn peek_coin(&self, p: usize, ahead: usize) -> Option<Value> {
        match &self.coins {
            CoinSource::Vector(v) => v.get(self.consumed.len() + ahead).cloned(),
            CoinSource::PerProcess(v) => v.get(p)?.get(self.used_per_process[p] + ahead).cloned(),
        }
    }

    /// Fails without side effects when the grant would need a coin that the
    /// source does not have.
    fn check_coins(&self, p: usize) -> Result<(), EngineError> {
        if !matches!(self.status[p], Status::Ready) {
            return Ok(());
        }
        let mut responses = self.info[p].responses.clone();
        for ahead in 0.. {
            if (self.alg.processes[p].program)(&responses) != ProgramAction::Flip {
                break;
            }
            let c = self
                .peek_coin(p, ahead)
                .ok_or(EngineError::CoinsExhausted {
                    flip: self.consumed.len() + ahead,
                })?;
            if self.class != AdversaryClass::Weak {
                break;
            }
            responses.push(c);
        }
        Ok(())
    }

    /// Executes one grant for process `p`.
    pub fn grant(&mut self, p: ProcessId) -> Result<(), EngineError> {
        let i = p.index();
        if i >= self.info.len() {
            return Err(EngineError::UnknownProcess(p));
        }
        if self.info[i].halted {
            return Err(EngineError::Halted(p));
        }
        self.check_coins(i)?;
        let start = self.history.len();
        if !self.info[i].started {
            self.info[i].started = true;
            self.active += 1;
            self.max_contention = self.max_contention.max(self.active);
        }
        self.schedule.push(p);
        match self.status[i] {
            Status::Ready => self.step_ready(i)?,
            Status::InMethod(_) => self.step_method(i)?,
            Status::Halted => unreachable!(),
        }
        if self.class == AdversaryClass::Weak {
            self.check_weak(start)?;
        }
        Ok(())
    }

    fn step_ready(&mut self, p: usize) -> Result<(), EngineError> {
        match self.program(p) {
            ProgramAction::Flip => {
                self.flip(p)?;
                if self.class == AdversaryClass::Weak {
                    self.weak_follow(p)?;
                }
                Ok(())
            }
            ProgramAction::Invoke { object, op, args } => {
                if self.instances.contains_key(&object) {
                    self.begin_method(p, object, op, args)?;
                    self.step_method(p)
                } else {
                    self.atomic_call(p, object, &op, args)
                }
            }
            ProgramAction::Done(_) => Err(EngineError::Halted(ProcessId(p as u32))),
        }
    }

    /// Continues a weak flip grant up to and including the next invocation.
    fn weak_follow(&mut self, p: usize) -> Result<(), EngineError> {
        while !self.info[p].halted {
            match self.program(p) {
                ProgramAction::Flip => self.flip(p)?,
                ProgramAction::Invoke { object, op, args } => {
                    return if self.instances.contains_key(&object) {
                        self.begin_method(p, object, op, args)
                    } else {
                        self.atomic_call(p, object, &op, args)
                    };
                }
                ProgramAction::Done(_) => unreachable!("halting is eager"),
            }
        }
        Ok(())
    }

    fn flip(&mut self, p: usize) -> Result<(), EngineError> {
        let c = self.peek_coin(p, 0).ok_or(EngineError::CoinsExhausted {
            flip: self.consumed.len(),
        })?;
        let pid = ProcessId(p as u32);
        let coin = self.coin_ids[p];
        self.history
            .push(StepKind::Inv, pid, coin, "flip", Value::Tuple(vec![]));
        self.history
            .push(StepKind::Rsp, pid, coin, "flip", c.clone());
        self.consumed.push(c.clone());
        self.used_per_process[p] += 1;
        self.deliver(p, c);
        Ok(())
    }

    fn check_object(&self, object: ObjectId) -> Result<(), EngineError> {
        if object.index() >= self.alg.objects.len() {
            return Err(EngineError::BadProgram(format!(
                "{object} is not a top-level object"
            )));
        }
        Ok(())
    }

    fn atomic_call(
        &mut self,
        p: usize,
        object: ObjectId,
        op: &str,
        args: Vec<Value>,
    ) -> Result<(), EngineError> {
        self.check_object(object)?;
        let pid = ProcessId(p as u32);
        let ret = self.memory.apply(object, pid, op, &args)?;
        self.history
            .push(StepKind::Inv, pid, object, op, Value::Tuple(args));
        self.history
            .push(StepKind::Rsp, pid, object, op, ret.clone());
        self.note_access(p, object, op, &ret);
        self.deliver(p, ret);
        Ok(())
    }

    fn begin_method(
        &mut self,
        p: usize,
        object: ObjectId,
        op: String,
        args: Vec<Value>,
    ) -> Result<(), EngineError> {
        self.check_object(object)?;
        let pid = ProcessId(p as u32);
        let inst = &self.instances[&object];
        let local = self
            .locals
            .get(&(pid, object))
            .cloned()
            .unwrap_or(Value::Unit);
        let mut body = inst.imp.begin(MethodCall {
            process: pid,
            op: &op,
            args: &args,
            local: &local,
        })?;
        let next = match body.resume(None) {
            MethodStep::Call(c) => c,
            MethodStep::Return { .. } => return Err(EngineError::EmptyMethod(op)),
        };
        self.history
            .push(StepKind::Inv, pid, object, op.clone(), Value::Tuple(args));
        self.info[p].in_method = true;
        self.status[p] = Status::InMethod(Method {
            object,
            op,
            body,
            next,
        });
        Ok(())
    }

    fn step_method(&mut self, p: usize) -> Result<(), EngineError> {
        let Status::InMethod(mut m) = std::mem::replace(&mut self.status[p], Status::Ready) else {
            unreachable!("step_method on a process outside a method")
        };
        let pid = ProcessId(p as u32);
        let inst = &self.instances[&m.object];
        let id = self.memory.resolve(inst, &m.next.target)?;
        if self.history.objects.len() < self.memory.len() {
            for info in &self.memory.infos()[self.history.objects.len()..] {
                self.history.objects.insert(info.id, info.clone());
            }
        }
        let ret = self.memory.apply(id, pid, m.next.op, &m.next.args)?;
        self.history.push(
            StepKind::Inv,
            pid,
            id,
            m.next.op,
            Value::Tuple(m.next.args.clone()),
        );
        self.history
            .push(StepKind::Rsp, pid, id, m.next.op, ret.clone());
        self.note_access(p, id, m.next.op, &ret);
        match m.body.resume(Some(ret)) {
            MethodStep::Call(c) => {
                m.next = c;
                self.status[p] = Status::InMethod(m);
            }
            MethodStep::Return { value, local } => {
                if let Some(l) = local {
                    self.locals.insert((pid, m.object), l);
                }
                self.history
                    .push(StepKind::Rsp, pid, m.object, m.op, value.clone());
                self.info[p].in_method = false;
                self.deliver(p, value);
            }
        }
        Ok(())
    }

    fn note_access(&mut self, p: usize, object: ObjectId, op: &str, ret: &Value) {
        let info = &mut self.info[p];
        info.shared_accesses += 1;
        if info.first_access.is_none() {
            info.first_access = Some((object, op.to_string()));
        }
        self.marks.record(ProcessId(p as u32), object, op, ret);
    }

    /// Hands a top-level response to the program and halts it if it is done.
    fn deliver(&mut self, p: usize, value: Value) {
        self.info[p].responses.push(value);
        if let ProgramAction::Done(v) = self.program(p) {
            self.status[p] = Status::Halted;
            self.info[p].halted = true;
            self.info[p].returned = Some(v);
            self.active -= 1;
        }
    }

    fn check_weak(&mut self, start: usize) -> Result<(), EngineError> {
        let steps = &self.history.steps;
        for i in start..steps.len() {
            let s = &steps[i];
            if !(s.is_rsp() && s.is_flip()) {
                continue;
            }
            self.flips_seen += 1;
            let ok = match steps.get(i + 1) {
                Some(next) => next.is_inv() && next.process == s.process,
                None => self.info[s.process.index()].halted,
            };
            if !ok {
                return Err(EngineError::WeakViolation {
                    flip: self.flips_seen,
                });
            }
        }
        Ok(())
    }
}

/// Runs `alg` under `adv` until every process halts, the adversary stops, or
/// `budget` grants have been issued.
pub fn run(
    alg: &AlgorithmSpec,
    adv: &mut dyn Adversary,
    coins: CoinSource,
    budget: usize,
) -> Result<RunRecord, EngineError> {
    run_shared(Arc::new(alg.clone()), adv, coins, budget)
}

pub fn run_shared(
    alg: Arc<AlgorithmSpec>,
    adv: &mut dyn Adversary,
    coins: CoinSource,
    budget: usize,
) -> Result<RunRecord, EngineError> {
    let mut sim = Simulation::from_shared(alg, adv.class(), coins);
    let mut exhausted = false;
    while !sim.all_halted() {
        if sim.grants() >= budget {
            exhausted = true;
            break;
        }
        match adv.next(&sim.view()) {
            Some(p) => sim.grant(p)?,
            None => break,
        }
    }
    let mut rec = sim.record();
    rec.budget_exhausted = exhausted;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::ScheduleScript;
    use crate::algorithm::{process, straight_line, ObjectDecl, Stmt};

    fn one_reader() -> AlgorithmSpec {
        AlgorithmSpec {
            processes: vec![process(
                "p",
                straight_line(vec![Stmt::call(0, "read", vec![])]),
            )],
            objects: vec![ObjectDecl::atomic(
                "R",
                SeqSpec::Register { initial: 1.into() },
            )],
            omega: vec![0.into(), 1.into()],
        }
    }

    #[test]
    fn single_atomic_read() {
        let mut adv = ScheduleScript::oblivious(vec![0]);
        let rec = run(
            &one_reader(),
            &mut adv,
            CoinSource::Vector(vec![]),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(rec.history.len(), 2);
        assert_eq!(rec.returned(0), Some(&Value::Int(1)));
        assert_eq!(rec.max_point_contention, 1);
    }

    #[test]
    fn scheduling_a_halted_process_fails() {
        let mut adv = ScheduleScript::oblivious(vec![0, 0]);
        let err = run(
            &one_reader(),
            &mut adv,
            CoinSource::Vector(vec![]),
            DEFAULT_BUDGET,
        );
        // the run ends as soon as p halts, so the second grant is never requested
        assert!(err.is_ok());
        let mut sim = Simulation::new(
            &one_reader(),
            AdversaryClass::Strong,
            CoinSource::Vector(vec![]),
        );
        sim.grant(ProcessId(0)).unwrap();
        assert_eq!(
            sim.grant(ProcessId(0)),
            Err(EngineError::Halted(ProcessId(0)))
        );
    }

    #[test]
    fn missing_coin_leaves_state_untouched() {
        let alg = AlgorithmSpec {
            processes: vec![process("p", straight_line(vec![Stmt::Flip]))],
            objects: vec![],
            omega: vec![0.into(), 1.into()],
        };
        let mut sim = Simulation::new(&alg, AdversaryClass::Strong, CoinSource::Vector(vec![]));
        assert_eq!(
            sim.grant(ProcessId(0)),
            Err(EngineError::CoinsExhausted { flip: 0 })
        );
        assert!(sim.history().is_empty());
        sim.push_coin(1.into());
        sim.grant(ProcessId(0)).unwrap();
        assert_eq!(sim.procs()[0].returned, Some(Value::Int(1)));
    }
}
