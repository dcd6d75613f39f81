use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("maze line {line}: {message}")]
    Maze { line: usize, message: String },
    #[error("invalid maze: {0}")]
    InvalidMaze(String),
    #[error("invalid abstraction: {0}")]
    InvalidAbstraction(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
