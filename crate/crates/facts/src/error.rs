use facts_core::{CcbfError, ParamError, SnapshotError, TagError};
use thiserror::Error;

use crate::wire::{ComplainCode, WireError};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("server is not set up")]
    NotSetUp,
    #[error("server state already exists")]
    AlreadySetUp,
    #[error("at least one user required")]
    NoUsers,
    #[error("unknown user or bad token")]
    Unauthenticated,
    #[error("parameters: {0}")]
    Param(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum FactsError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Server(#[from] ServerError),
    #[error("parameters: {0}")]
    Param(#[from] ParamError),
    #[error("tag: {0}")]
    Tag(#[from] TagError),
    #[error("table snapshot: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("ccbf: {0}")]
    Ccbf(#[from] CcbfError),
    #[error("complaint refused: {0:?}")]
    Complaint(ComplainCode),
    #[error("config: {0}")]
    Config(String),
    #[error("no inbox entry {0}")]
    NoEntry(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}
