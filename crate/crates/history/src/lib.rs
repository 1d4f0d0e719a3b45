//! Histories of shared-memory executions.
//!
//! A [`History`] is a sequence of invocation and response steps. Steps on base
//! objects carry [`Level::Base`]; the outer boundaries of implemented-object
//! method calls carry [`Level::Interpreted`]. [`History::interpret`] maps a
//! low-level history to its interpreted view.

pub mod error;
pub mod history;
pub mod jsonl;
pub mod spec;
pub mod timed;
pub mod value;

pub use error::HistoryError;
pub use history::{
    happens_before, validate_sequential, History, Level, ObjectInfo, OperationInstance, StepKind,
    StepRecord,
};
pub use jsonl::{from_jsonl, to_jsonl};
pub use spec::{SeqSpec, SpecError, SpecState};
pub use timed::{timed_from_history, Time, TimedExecution};
pub use value::{ObjectId, ProcessId, Value};
