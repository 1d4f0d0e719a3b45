//! Algorithms: per-process programs over a fixed list of shared objects.

use std::fmt;
use std::sync::Arc;

use slin_history::{ObjectId, SeqSpec, Value};
use slin_objects::SharedImpl;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgramAction {
    /// Invoke `op` on top-level object `object` (an index into
    /// [`AlgorithmSpec::objects`]).
    Invoke {
        object: ObjectId,
        op: String,
        args: Vec<Value>,
    },
    /// Flip this process's coin.
    Flip,
    /// Halt with a result.
    Done(Value),
}

impl ProgramAction {
    pub fn invoke(object: usize, op: &str, args: Vec<Value>) -> Self {
        ProgramAction::Invoke {
            object: ObjectId(object as u32),
            op: op.to_string(),
            args,
        }
    }
}

/// The next action as a function of every response received so far, flip
/// outcomes included.
pub type ProgramFn = Arc<dyn Fn(&[Value]) -> ProgramAction + Send + Sync>;

/// Computes call arguments from the responses received before the call.
pub type ArgFn = Arc<dyn Fn(&[Value]) -> Vec<Value> + Send + Sync>;

#[derive(Clone)]
pub struct ProcessSpec {
    pub name: String,
    pub program: ProgramFn,
}

impl fmt::Debug for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProcessSpec")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Binding {
    Atomic(SeqSpec),
    Implemented(SharedImpl),
}

impl Binding {
    pub fn spec(&self) -> SeqSpec {
        match self {
            Binding::Atomic(s) => s.clone(),
            Binding::Implemented(imp) => imp.spec(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObjectDecl {
    pub name: String,
    pub binding: Binding,
}

impl ObjectDecl {
    pub fn atomic(name: impl Into<String>, spec: SeqSpec) -> Self {
        ObjectDecl {
            name: name.into(),
            binding: Binding::Atomic(spec),
        }
    }

    pub fn implemented(name: impl Into<String>, imp: SharedImpl) -> Self {
        ObjectDecl {
            name: name.into(),
            binding: Binding::Implemented(imp),
        }
    }
}

/// Processes `0..processes.len()`, top-level objects `0..objects.len()`, and
/// the coin flip domain.
#[derive(Clone, Debug)]
pub struct AlgorithmSpec {
    pub processes: Vec<ProcessSpec>,
    pub objects: Vec<ObjectDecl>,
    pub omega: Vec<Value>,
}

impl AlgorithmSpec {
    pub fn process_count(&self) -> usize {
        self.processes.len()
    }
}

/// One statement of a straight-line program.
#[derive(Clone)]
pub enum Stmt {
    Call {
        object: usize,
        op: &'static str,
        args: ArgFn,
    },
    Flip,
}

impl Stmt {
    pub fn call(object: usize, op: &'static str, args: Vec<Value>) -> Self {
        Stmt::Call {
            object,
            op,
            args: Arc::new(move |_| args.clone()),
        }
    }

    pub fn call_with(
        object: usize,
        op: &'static str,
        args: impl Fn(&[Value]) -> Vec<Value> + Send + Sync + 'static,
    ) -> Self {
        Stmt::Call {
            object,
            op,
            args: Arc::new(args),
        }
    }
}

/// A program that runs `stmts` in order and returns its last response.
pub fn straight_line(stmts: Vec<Stmt>) -> ProgramFn {
    Arc::new(
        move |responses: &[Value]| match stmts.get(responses.len()) {
            Some(Stmt::Flip) => ProgramAction::Flip,
            Some(Stmt::Call { object, op, args }) => {
                ProgramAction::invoke(*object, op, args(responses))
            }
            None => ProgramAction::Done(responses.last().cloned().unwrap_or(Value::Unit)),
        },
    )
}

pub fn process(name: impl Into<String>, program: ProgramFn) -> ProcessSpec {
    ProcessSpec {
        name: name.into(),
        program,
    }
}
