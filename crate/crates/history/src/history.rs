use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::HistoryError;
use crate::spec::{SeqSpec, SpecError};
use crate::value::{ObjectId, ProcessId, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Inv,
    Rsp,
}

/// Whether a step (or object) lives at the base level or is the boundary of an
/// implemented-object method call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Base,
    Interpreted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub kind: StepKind,
    pub process: ProcessId,
    pub object: ObjectId,
    pub op: String,
    /// Argument tuple for invocations, return value for responses.
    pub payload: Value,
    pub level: Level,
}

impl StepRecord {
    pub fn is_inv(&self) -> bool {
        self.kind == StepKind::Inv
    }

    pub fn is_rsp(&self) -> bool {
        self.kind == StepKind::Rsp
    }

    pub fn is_flip(&self) -> bool {
        self.op == "flip"
    }

    /// Equality ignoring position.
    pub fn same_event(&self, other: &StepRecord) -> bool {
        self.kind == other.kind
            && self.process == other.process
            && self.object == other.object
            && self.op == other.op
            && self.payload == other.payload
    }
}

/// Registry entry describing one object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectInfo {
    pub id: ObjectId,
    pub name: String,
    #[serde(rename = "type")]
    pub type_name: String,
    /// `Interpreted` marks an implemented object.
    pub level: Level,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SeqSpec>,
}

impl ObjectInfo {
    pub fn base(id: ObjectId, name: impl Into<String>, spec: SeqSpec) -> Self {
        ObjectInfo {
            id,
            name: name.into(),
            type_name: spec.type_name().to_string(),
            level: Level::Base,
            spec: Some(spec),
        }
    }

    pub fn implemented(id: ObjectId, name: impl Into<String>, spec: SeqSpec) -> Self {
        ObjectInfo {
            id,
            name: name.into(),
            type_name: spec.type_name().to_string(),
            level: Level::Interpreted,
            spec: Some(spec),
        }
    }
}

/// One operation: a matched invocation and (if complete) its response.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperationInstance {
    pub inv_index: usize,
    pub rsp_index: Option<usize>,
    pub process: ProcessId,
    pub object: ObjectId,
    pub op: String,
    pub args: Vec<Value>,
    pub ret: Option<Value>,
    pub level: Level,
}

impl OperationInstance {
    pub fn is_complete(&self) -> bool {
        self.rsp_index.is_some()
    }

    pub fn is_flip(&self) -> bool {
        self.op == "flip"
    }
}

/// A finite sequence of steps plus the process set and object registry.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct History {
    pub steps: Vec<StepRecord>,
    pub processes: BTreeSet<ProcessId>,
    pub objects: BTreeMap<ObjectId, ObjectInfo>,
}

impl History {
    pub fn new(
        processes: impl IntoIterator<Item = ProcessId>,
        objects: impl IntoIterator<Item = ObjectInfo>,
    ) -> Self {
        History {
            steps: Vec::new(),
            processes: processes.into_iter().collect(),
            objects: objects.into_iter().map(|o| (o.id, o)).collect(),
        }
    }

    /// Same registry, no steps.
    pub fn empty_like(&self) -> Self {
        History {
            steps: Vec::new(),
            processes: self.processes.clone(),
            objects: self.objects.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn level_of(&self, o: ObjectId) -> Level {
        self.objects.get(&o).map(|i| i.level).unwrap_or(Level::Base)
    }

    pub fn is_coin(&self, o: ObjectId) -> bool {
        self.objects
            .get(&o)
            .and_then(|i| i.spec.as_ref())
            .is_some_and(|s| s.is_coin())
    }

    /// Appends a step; the level is taken from the registry.
    pub fn push(
        &mut self,
        kind: StepKind,
        process: ProcessId,
        object: ObjectId,
        op: impl Into<String>,
        payload: Value,
    ) {
        let level = self.level_of(object);
        self.steps.push(StepRecord {
            index: self.steps.len(),
            kind,
            process,
            object,
            op: op.into(),
            payload,
            level,
        });
    }

    pub fn push_step(&mut self, mut step: StepRecord) {
        step.index = self.steps.len();
        self.steps.push(step);
    }

    /// Appends an invocation immediately followed by its response.
    pub fn push_atomic(
        &mut self,
        process: ProcessId,
        object: ObjectId,
        op: &str,
        args: Vec<Value>,
        ret: Value,
    ) {
        self.push(StepKind::Inv, process, object, op, Value::Tuple(args));
        self.push(StepKind::Rsp, process, object, op, ret);
    }

    pub fn prefix(&self, len: usize) -> History {
        History {
            steps: self.steps[..len.min(self.steps.len())].to_vec(),
            processes: self.processes.clone(),
            objects: self.objects.clone(),
        }
    }

    fn with_steps(&self, steps: impl IntoIterator<Item = StepRecord>) -> History {
        let mut out = self.empty_like();
        for s in steps {
            out.push_step(s);
        }
        out
    }

    /// Checks index numbering and per-process, per-level matching.
    pub fn validate(&self) -> Result<(), HistoryError> {
        let mut open: BTreeMap<ProcessId, Vec<&StepRecord>> = BTreeMap::new();
        for (i, s) in self.steps.iter().enumerate() {
            if s.index != i {
                return Err(HistoryError::Malformed(format!(
                    "step {i} carries index {}",
                    s.index
                )));
            }
            if !self.processes.contains(&s.process) {
                return Err(HistoryError::UnknownProcess(s.process));
            }
            if !self.objects.contains_key(&s.object) {
                return Err(HistoryError::UnknownObject(s.object));
            }
            let stack = open.entry(s.process).or_default();
            match s.kind {
                StepKind::Inv => {
                    if let Some(top) = stack.last() {
                        if top.level == Level::Base || s.level == Level::Interpreted {
                            return Err(HistoryError::Malformed(format!(
                                "step {i}: {} invokes {} while {} on {} is pending",
                                s.process, s.op, top.op, top.object
                            )));
                        }
                    }
                    if !matches!(s.payload, Value::Tuple(_)) {
                        return Err(HistoryError::Malformed(format!(
                            "step {i}: invocation payload must be an argument tuple"
                        )));
                    }
                    stack.push(s);
                }
                StepKind::Rsp => match stack.pop() {
                    Some(top)
                        if top.object == s.object && top.op == s.op && top.level == s.level => {}
                    _ => {
                        return Err(HistoryError::Malformed(format!(
                            "step {i}: response {} on {} by {} has no matching invocation",
                            s.op, s.object, s.process
                        )))
                    }
                },
            }
            if s.is_flip() && s.is_inv() {
                if let Some(next) = self.steps.get(i + 1) {
                    if !(next.is_rsp() && next.is_flip() && next.process == s.process) {
                        return Err(HistoryError::Malformed(format!(
                            "step {i}: flip by {} is not atomic",
                            s.process
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// All operations (every level) in invocation order.
    pub fn operations(&self) -> Vec<OperationInstance> {
        let mut ops: Vec<OperationInstance> = Vec::new();
        let mut open: BTreeMap<ProcessId, Vec<usize>> = BTreeMap::new();
        for s in &self.steps {
            let stack = open.entry(s.process).or_default();
            match s.kind {
                StepKind::Inv => {
                    stack.push(ops.len());
                    ops.push(OperationInstance {
                        inv_index: s.index,
                        rsp_index: None,
                        process: s.process,
                        object: s.object,
                        op: s.op.clone(),
                        args: s
                            .payload
                            .as_tuple()
                            .map(<[Value]>::to_vec)
                            .unwrap_or_default(),
                        ret: None,
                        level: s.level,
                    });
                }
                StepKind::Rsp => {
                    if let Some(k) = stack.pop() {
                        ops[k].rsp_index = Some(s.index);
                        ops[k].ret = Some(s.payload.clone());
                    }
                }
            }
        }
        ops
    }

    /// H|p.
    pub fn project_process(&self, p: ProcessId) -> Result<History, HistoryError> {
        if !self.processes.contains(&p) {
            return Err(HistoryError::UnknownProcess(p));
        }
        Ok(self.with_steps(self.steps.iter().filter(|s| s.process == p).cloned()))
    }

    /// H|O.
    pub fn project_object(&self, o: ObjectId) -> Result<History, HistoryError> {
        if !self.objects.contains_key(&o) {
            return Err(HistoryError::UnknownObject(o));
        }
        Ok(self.with_steps(self.steps.iter().filter(|s| s.object == o).cloned()))
    }

    /// H‖O: every step a process takes while inside a method call on the
    /// implemented object `o`, boundaries included.
    pub fn project_method_intervals(&self, o: ObjectId) -> Result<History, HistoryError> {
        match self.objects.get(&o) {
            None => return Err(HistoryError::UnknownObject(o)),
            Some(info) if info.level == Level::Base => return Err(HistoryError::NotImplemented(o)),
            Some(_) => {}
        }
        let mut inside: BTreeSet<ProcessId> = BTreeSet::new();
        let mut kept = Vec::new();
        for s in &self.steps {
            let boundary = s.object == o && s.level == Level::Interpreted;
            if boundary && s.is_inv() {
                inside.insert(s.process);
            }
            if inside.contains(&s.process) {
                kept.push(s.clone());
            }
            if boundary && s.is_rsp() {
                inside.remove(&s.process);
            }
        }
        Ok(self.with_steps(kept))
    }

    /// Γ(H): drops every step a process takes strictly inside one of its
    /// implemented-object method calls.
    pub fn interpret(&self) -> History {
        let kept = self
            .interpreted_indices()
            .into_iter()
            .map(|i| self.steps[i].clone());
        self.with_steps(kept.collect::<Vec<_>>())
    }

    /// Positions of the steps that `interpret` keeps.
    pub fn interpreted_indices(&self) -> Vec<usize> {
        let mut depth: BTreeMap<ProcessId, usize> = BTreeMap::new();
        let mut kept = Vec::new();
        for (i, s) in self.steps.iter().enumerate() {
            let d = depth.entry(s.process).or_insert(0);
            if s.level == Level::Interpreted {
                match s.kind {
                    StepKind::Inv => {
                        if *d == 0 {
                            kept.push(i);
                        }
                        *d += 1;
                    }
                    StepKind::Rsp => {
                        *d = d.saturating_sub(1);
                        if *d == 0 {
                            kept.push(i);
                        }
                    }
                }
            } else if *d == 0 {
                kept.push(i);
            }
        }
        kept
    }

    /// H[k]: the prefix ending with the k-th flip invocation, or `self` when
    /// fewer than k flips occur. `k = 0` yields the empty prefix.
    pub fn prefix_to_flip(&self, k: usize) -> History {
        if k == 0 {
            return self.empty_like();
        }
        let mut seen = 0;
        for s in &self.steps {
            if s.is_flip() && s.is_inv() {
                seen += 1;
                if seen == k {
                    return self.prefix(s.index + 1);
                }
            }
        }
        self.clone()
    }

    pub fn flip_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.is_flip() && s.is_inv())
            .count()
    }

    /// Every operation is atomic: its invocation is the last step or is
    /// immediately followed by its response.
    pub fn is_sequential(&self) -> bool {
        let mut i = 0;
        while i < self.steps.len() {
            let s = &self.steps[i];
            if !s.is_inv() {
                return false;
            }
            match self.steps.get(i + 1) {
                None => return true,
                Some(r) => {
                    if !(r.is_rsp()
                        && r.process == s.process
                        && r.object == s.object
                        && r.op == s.op)
                    {
                        return false;
                    }
                }
            }
            i += 2;
        }
        true
    }

    /// Specs for every registered object that carries one.
    pub fn specs(&self) -> BTreeMap<ObjectId, SeqSpec> {
        self.objects
            .iter()
            .filter_map(|(id, info)| info.spec.clone().map(|s| (*id, s)))
            .collect()
    }

    /// Equality of step contents, ignoring registries and levels.
    pub fn same_events(&self, other: &History) -> bool {
        self.steps.len() == other.steps.len()
            && self
                .steps
                .iter()
                .zip(&other.steps)
                .all(|(a, b)| a.same_event(b))
    }
}

/// a ≺_H b: a is complete and responds before b is invoked.
pub fn happens_before(a: &OperationInstance, b: &OperationInstance) -> bool {
    a.rsp_index.is_some_and(|r| r < b.inv_index)
}

/// Replays a sequential history against `specs`.
///
/// Returns `Ok(false)` when some recorded response disagrees with the
/// specification and an error when `h` is not sequential.
pub fn validate_sequential(
    h: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<bool, HistoryError> {
    if !h.is_sequential() {
        return Err(HistoryError::NotSequential);
    }
    let mut states = BTreeMap::new();
    for op in h.operations() {
        let Some(ret) = &op.ret else { continue };
        let spec = specs
            .get(&op.object)
            .ok_or(HistoryError::MissingSpec(op.object))?;
        if spec.is_coin() {
            if !spec.admits_flip(ret) {
                return Ok(false);
            }
            continue;
        }
        let state = states
            .entry(op.object)
            .or_insert_with(|| spec.initial_state());
        match spec.apply(state, op.process, &op.op, &op.args) {
            Ok((next, r)) => {
                if &r != ret {
                    return Ok(false);
                }
                *state = next;
            }
            Err(SpecError::BadArgs { .. }) => return Ok(false),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}
