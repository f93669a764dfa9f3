use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dangling reference: {0}")]
    Reference(String),
    #[error("invalid instance: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("disruption out of range: {0}")]
    Range(String),
    #[error("slot coverage: {0}")]
    Coverage(String),
    #[error("enumeration budget exceeded: {0}")]
    Size(String),
    #[error("gate capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid cut bound: {0}")]
    InvalidBound(String),
    #[error("time limit reached")]
    TimeLimit,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RecoveryError>;
