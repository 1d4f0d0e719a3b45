//! Implemented objects as deterministic step machines over base objects.
//!
//! An [`Implementation`] declares the base objects each instance owns and
//! starts a [`MethodBody`] per call. A body is resumed with the response of
//! its previous base operation and yields either the next base operation or
//! the method's return value. All shared state lives in a [`Memory`].

use std::fmt::Debug;
use std::sync::Arc;

use slin_history::{ProcessId, SeqSpec, Value};
use thiserror::Error;

pub mod cas;
pub mod catalog;
pub mod counter;
pub mod memory;
pub mod mrsw;
pub mod mutex;
pub mod queue;
pub mod snapshot;
pub mod srsw;

pub use catalog::{by_name, CATALOG};
pub use memory::{Instance, Memory, SoloRunner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObjectError {
    #[error("{type_name} has no operation {op:?}")]
    UnknownOp { type_name: String, op: String },
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("{0}")]
    Role(String),
    #[error("base object access failed: {0}")]
    Base(String),
    #[error("method did not return within {0} base steps")]
    Budget(usize),
}

/// Address of a base object relative to the owning instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseRef {
    /// Index into [`Implementation::base_objects`].
    Fixed(usize),
    /// Element of a growable array declared by [`Implementation::arrays`].
    Element { array: usize, index: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCall {
    pub target: BaseRef,
    pub op: &'static str,
    pub args: Vec<Value>,
}

impl BaseCall {
    pub fn fixed(i: usize, op: &'static str, args: Vec<Value>) -> Self {
        BaseCall {
            target: BaseRef::Fixed(i),
            op,
            args,
        }
    }

    pub fn element(array: usize, index: u64, op: &'static str, args: Vec<Value>) -> Self {
        BaseCall {
            target: BaseRef::Element { array, index },
            op,
            args,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MethodStep {
    Call(BaseCall),
    /// `local`, when present, replaces the caller's persistent per-process
    /// state for this instance (e.g. a writer's sequence number).
    Return {
        value: Value,
        local: Option<Value>,
    },
}

impl MethodStep {
    pub fn ret(value: Value) -> Self {
        MethodStep::Return { value, local: None }
    }
}

pub trait MethodBody: MethodBodyClone + Debug + Send + Sync {
    /// `last` is `None` on the first call and the previous base response afterwards.
    fn resume(&mut self, last: Option<Value>) -> MethodStep;
}

pub trait MethodBodyClone {
    fn clone_box(&self) -> Box<dyn MethodBody>;
}

impl<T: MethodBody + Clone + 'static> MethodBodyClone for T {
    fn clone_box(&self) -> Box<dyn MethodBody> {
        Box::new(self.clone())
    }
}

impl Clone for Box<dyn MethodBody> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

#[derive(Clone, Debug)]
pub struct BaseDecl {
    pub name: String,
    pub spec: SeqSpec,
}

impl BaseDecl {
    pub fn new(name: impl Into<String>, spec: SeqSpec) -> Self {
        BaseDecl {
            name: name.into(),
            spec,
        }
    }
}

/// A growable array of base objects; elements are allocated on first access.
#[derive(Clone, Debug)]
pub struct ArrayDecl {
    pub name: String,
    pub element: SeqSpec,
    /// Spec for element 0 when it differs from the rest.
    pub head: Option<SeqSpec>,
}

impl ArrayDecl {
    pub fn spec_at(&self, index: u64) -> SeqSpec {
        match (&self.head, index) {
            (Some(h), 0) => h.clone(),
            _ => self.element.clone(),
        }
    }
}

/// One invocation on an implemented object.
#[derive(Clone, Copy, Debug)]
pub struct MethodCall<'a> {
    pub process: ProcessId,
    pub op: &'a str,
    pub args: &'a [Value],
    /// Per-process state left by this process's previous call (`Unit` initially).
    pub local: &'a Value,
}

pub trait Implementation: Debug + Send + Sync {
    /// Catalog name.
    fn name(&self) -> &str;
    /// Sequential specification of the implemented type.
    fn spec(&self) -> SeqSpec;
    fn base_objects(&self) -> Vec<BaseDecl>;
    fn arrays(&self) -> Vec<ArrayDecl> {
        Vec::new()
    }
    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError>;
}

pub type SharedImpl = Arc<dyn Implementation>;

pub(crate) fn unknown_op(type_name: &str, op: &str) -> ObjectError {
    ObjectError::UnknownOp {
        type_name: type_name.to_string(),
        op: op.to_string(),
    }
}

pub(crate) fn expect_args(op: &str, args: &[Value], n: usize) -> Result<(), ObjectError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(ObjectError::BadArgs(format!(
            "{op} takes {n} argument(s), got {}",
            args.len()
        )))
    }
}
