//! Decision procedures for linearizability and strong linearizability of
//! finite histories and history trees.

use std::fmt;

use serde::{Deserialize, Serialize};
use slin_engine::EngineError;
use slin_history::{HistoryError, ObjectId, ProcessId};
use thiserror::Error;

pub mod equivalence;
pub mod example;
pub mod linearize;
pub mod locality;
pub mod normalize;
pub mod points;
pub mod strong;
mod table;
pub mod tree;
pub mod validate;

pub use equivalence::{check_equivalence, equivalent_to_some_strong_adversary, Equivalence};
pub use linearize::{common_linearization, linearize_one};
pub use locality::{check_locality, Locality};
pub use normalize::{normalize_witness, witness_from_leaf_images};
pub use points::{extract_linearization_points, linearization_from_points, PointMap};
pub use strong::{check_strong_lin, check_strong_lin_with, Preference, Witness};
pub use tree::{HistoryTree, TreeNode};
pub use validate::{check_linearization, check_normal_form, validate_witness};

/// Largest operation count a single search accepts.
pub const MAX_OPS: usize = 128;
/// Largest tree the strong checker accepts.
pub const MAX_TREE_NODES: usize = 100_000;
/// Largest number of pending operations at any tree node.
pub const MAX_PENDING: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("malformed history tree: {0}")]
    MalformedTree(String),
    #[error("history error: {0}")]
    History(String),
    #[error("no specification for object {0}")]
    MissingSpec(ObjectId),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("not a linearization: {0}")]
    NotALinearization(String),
    #[error("projection mismatch: {0}")]
    ProjectionMismatch(String),
    #[error("run sets are not indexed alike: {0}")]
    IndexMismatch(String),
    #[error("bad JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl From<HistoryError> for CheckError {
    fn from(e: HistoryError) -> Self {
        CheckError::History(e.to_string())
    }
}

/// Names an operation of an interpreted history by its process and its
/// position among that process's operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpKey {
    pub process: ProcessId,
    pub ordinal: usize,
}

impl fmt::Display for OpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.process, self.ordinal)
    }
}
