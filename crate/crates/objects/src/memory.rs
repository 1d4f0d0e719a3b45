use std::collections::BTreeMap;
use std::sync::Arc;

use slin_history::{Level, ObjectId, ObjectInfo, ProcessId, SeqSpec, SpecState, Value};

use crate::{ArrayDecl, BaseRef, Implementation, MethodCall, MethodStep, ObjectError, SharedImpl};

#[derive(Clone, Debug)]
struct Cell {
    spec: SeqSpec,
    state: SpecState,
    owner: Option<ObjectId>,
}

#[derive(Clone, Debug)]
struct ArraySlot {
    decl: ArrayDecl,
    owner: ObjectId,
    prefix: String,
    elems: BTreeMap<u64, ObjectId>,
}

/// Base objects of one simulation, addressed by dense [`ObjectId`]s.
#[derive(Clone, Debug, Default)]
pub struct Memory {
    infos: Vec<ObjectInfo>,
    cells: Vec<Option<Cell>>,
    arrays: Vec<ArraySlot>,
}

/// A bound instance of an implementation: its id plus the ids of the base
/// objects it owns.
#[derive(Clone, Debug)]
pub struct Instance {
    pub object: ObjectId,
    pub imp: SharedImpl,
    pub fixed: Vec<ObjectId>,
    pub arrays: Vec<usize>,
}

impl Memory {
    pub fn new() -> Self {
        Memory::default()
    }

    fn next_id(&self) -> ObjectId {
        ObjectId(self.infos.len() as u32)
    }

    /// Allocates an atomic base object.
    pub fn alloc_base(
        &mut self,
        name: impl Into<String>,
        spec: SeqSpec,
        owner: Option<ObjectId>,
    ) -> ObjectId {
        let id = self.next_id();
        self.infos.push(ObjectInfo::base(id, name, spec.clone()));
        self.cells.push(Some(Cell {
            state: spec.initial_state(),
            spec,
            owner,
        }));
        id
    }

    /// Reserves an id for an implemented object; bind it later with [`Memory::instantiate`].
    pub fn reserve_implemented(&mut self, name: impl Into<String>, spec: SeqSpec) -> ObjectId {
        let id = self.next_id();
        self.infos.push(ObjectInfo::implemented(id, name, spec));
        self.cells.push(None);
        id
    }

    /// Allocates the fixed base objects of `imp` for the implemented object `object`.
    pub fn instantiate(&mut self, object: ObjectId, imp: SharedImpl) -> Instance {
        let prefix = self.infos[object.index()].name.clone();
        let fixed = imp
            .base_objects()
            .into_iter()
            .map(|d| self.alloc_base(format!("{prefix}.{}", d.name), d.spec, Some(object)))
            .collect();
        let arrays = imp
            .arrays()
            .into_iter()
            .map(|decl| {
                self.arrays.push(ArraySlot {
                    prefix: format!("{prefix}.{}", decl.name),
                    decl,
                    owner: object,
                    elems: BTreeMap::new(),
                });
                self.arrays.len() - 1
            })
            .collect();
        Instance {
            object,
            imp,
            fixed,
            arrays,
        }
    }

    pub fn resolve(&mut self, inst: &Instance, target: &BaseRef) -> Result<ObjectId, ObjectError> {
        match *target {
            BaseRef::Fixed(i) => inst
                .fixed
                .get(i)
                .copied()
                .ok_or_else(|| ObjectError::Base(format!("no fixed base object {i}"))),
            BaseRef::Element { array, index } => {
                let slot = *inst
                    .arrays
                    .get(array)
                    .ok_or_else(|| ObjectError::Base(format!("no array {array}")))?;
                if let Some(id) = self.arrays[slot].elems.get(&index) {
                    return Ok(*id);
                }
                let a = &self.arrays[slot];
                let (name, spec, owner) = (
                    format!("{}[{index}]", a.prefix),
                    a.decl.spec_at(index),
                    a.owner,
                );
                let id = self.alloc_base(name, spec, Some(owner));
                self.arrays[slot].elems.insert(index, id);
                Ok(id)
            }
        }
    }

    pub fn apply(
        &mut self,
        id: ObjectId,
        process: ProcessId,
        op: &str,
        args: &[Value],
    ) -> Result<Value, ObjectError> {
        let cell = self
            .cells
            .get_mut(id.index())
            .and_then(Option::as_mut)
            .ok_or_else(|| ObjectError::Base(format!("{id} is not a base object")))?;
        let (next, ret) = cell
            .spec
            .apply(&cell.state, process, op, args)
            .map_err(|e| ObjectError::Base(e.to_string()))?;
        cell.state = next;
        Ok(ret)
    }

    pub fn state(&self, id: ObjectId) -> Option<&SpecState> {
        self.cells.get(id.index())?.as_ref().map(|c| &c.state)
    }

    /// The implemented object owning base object `id`, if any.
    pub fn owner(&self, id: ObjectId) -> Option<ObjectId> {
        self.cells.get(id.index())?.as_ref()?.owner
    }

    pub fn is_base(&self, id: ObjectId) -> bool {
        self.infos
            .get(id.index())
            .is_some_and(|i| i.level == Level::Base)
    }

    pub fn infos(&self) -> &[ObjectInfo] {
        &self.infos
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }
}

/// Runs method calls on a single instance one at a time, for sequential tests.
#[derive(Clone, Debug)]
pub struct SoloRunner {
    pub memory: Memory,
    pub instance: Instance,
    locals: BTreeMap<ProcessId, Value>,
    /// `(process, base object, op)` for every base step taken.
    pub trace: Vec<(ProcessId, ObjectId, &'static str)>,
    pub budget: usize,
}

impl SoloRunner {
    pub fn new(imp: impl Implementation + 'static) -> Self {
        SoloRunner::from_shared(Arc::new(imp))
    }

    pub fn from_shared(imp: SharedImpl) -> Self {
        let mut memory = Memory::new();
        let object = memory.reserve_implemented(imp.name().to_string(), imp.spec());
        let instance = memory.instantiate(object, imp);
        SoloRunner {
            memory,
            instance,
            locals: BTreeMap::new(),
            trace: Vec::new(),
            budget: 10_000,
        }
    }

    pub fn call(
        &mut self,
        process: ProcessId,
        op: &str,
        args: &[Value],
    ) -> Result<Value, ObjectError> {
        let local = self.locals.get(&process).cloned().unwrap_or(Value::Unit);
        let mut body = self.instance.imp.begin(MethodCall {
            process,
            op,
            args,
            local: &local,
        })?;
        let mut last = None;
        for _ in 0..=self.budget {
            match body.resume(last.take()) {
                MethodStep::Return { value, local } => {
                    if let Some(l) = local {
                        self.locals.insert(process, l);
                    }
                    return Ok(value);
                }
                MethodStep::Call(c) => {
                    let id = self.memory.resolve(&self.instance, &c.target)?;
                    self.trace.push((process, id, c.op));
                    last = Some(self.memory.apply(id, process, c.op, &c.args)?);
                }
            }
        }
        Err(ObjectError::Budget(self.budget))
    }
}
