use thiserror::Error;

use crate::spec::SpecError;
use crate::value::{ObjectId, ProcessId};

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("object {0} is a base object, not an implemented one")]
    NotImplemented(ObjectId),
    #[error("no sequential specification registered for {0}")]
    MissingSpec(ObjectId),
    #[error("history is not sequential")]
    NotSequential,
    #[error("malformed history: {0}")]
    Malformed(String),
    #[error("malformed timed execution: {0}")]
    BadTiming(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}
