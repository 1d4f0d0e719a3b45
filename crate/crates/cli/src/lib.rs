//! Named experiments, report rendering and the `slin` command line.

use std::path::PathBuf;

use slin_checkers::CheckError;
use slin_engine::EngineError;
use slin_history::HistoryError;
use thiserror::Error;

pub mod cli;
pub mod expected;
pub mod experiments;
pub mod report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {1}", .0.display())]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    History(#[from] HistoryError),
}
