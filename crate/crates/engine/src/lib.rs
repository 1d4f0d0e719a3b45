//! Scheduler simulation of randomized programs over shared objects.
//!
//! An [`AlgorithmSpec`] fixes the processes' programs and the top-level objects,
//! each bound either to an atomic sequential spec or to an implementation from
//! `slin-objects`. A [`Simulation`] executes it one grant at a time under an
//! [`Adversary`] of a given [`AdversaryClass`]; [`game::solve`] computes exact
//! game values over all adversaries of a class, and [`enumerate`] averages over
//! all coin vectors for a fixed adversary.

pub mod adversary;
pub mod algorithm;
pub mod enumerate;
pub mod game;
pub mod loadbalance;
pub mod marks;
pub mod phi;
pub mod scenarios;
pub mod sim;

use slin_history::{HistoryError, ProcessId};
use slin_objects::ObjectError;
use thiserror::Error;

pub use adversary::{
    Adversary, AdversaryClass, Observed, RoundRobin, ScheduleScript, SeededRandom, View, Waves,
};
pub use algorithm::{
    process, straight_line, AlgorithmSpec, Binding, ObjectDecl, ProcessSpec, ProgramAction,
    ProgramFn, Stmt,
};
pub use marks::MarkState;
pub use sim::{run, run_shared, CoinSource, ProcInfo, RunRecord, Simulation, DEFAULT_BUDGET};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{0} has halted")]
    Halted(ProcessId),
    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),
    #[error("flip #{flip} is not immediately followed by an invocation of the same process")]
    WeakViolation { flip: usize },
    #[error("no outcome for flip #{flip}")]
    CoinsExhausted { flip: usize },
    #[error(transparent)]
    Object(#[from] ObjectError),
    #[error("{0}")]
    History(String),
    #[error("method {0} returned without touching a base object")]
    EmptyMethod(String),
    #[error("bad program: {0}")]
    BadProgram(String),
    #[error("a run needs more than {horizon} flips")]
    HorizonExceeded { horizon: usize },
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("n = {0} is not a perfect square")]
    NotSquare(usize),
    #[error("invalid target process {0}")]
    InvalidTarget(usize),
    #[error("trial count must be positive")]
    NoTrials,
    #[error("{0} adversaries are not supported here")]
    UnsupportedClass(AdversaryClass),
    #[error("run exceeded its budget of {0} grants")]
    BudgetExceeded(usize),
}

impl From<HistoryError> for EngineError {
    fn from(e: HistoryError) -> Self {
        EngineError::History(e.to_string())
    }
}

impl std::fmt::Display for AdversaryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AdversaryClass::Oblivious => "oblivious",
            AdversaryClass::Strong => "strong",
            AdversaryClass::Weak => "weak",
            AdversaryClass::Offline => "offline",
        })
    }
}
