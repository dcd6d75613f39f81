use thiserror::Error;

use crate::types::SpaceId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown outcome space {0:?}")]
    UnknownSpace(SpaceId),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value {value} out of bounds in {what}")]
    OutOfBounds { what: &'static str, value: f64 },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("task hierarchy contains a cycle through {0:?}")]
    CycleDetected(SpaceId),
    #[error("invalid task hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("no data in outcome space {0:?} and random fallback disabled")]
    EmptyModel(SpaceId),
    #[error("outcome space {0:?} has no component outcome spaces")]
    NoComponents(SpaceId),
    #[error("teacher {teacher} is not expert in {space:?}")]
    NotExpert { teacher: String, space: SpaceId },
    #[error("invalid teacher: {0}")]
    InvalidTeacher(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
