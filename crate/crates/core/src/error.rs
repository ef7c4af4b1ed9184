use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid polygon size {0}: need n >= 3")]
    InvalidSize(usize),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("empty polygon space: {0}")]
    EmptySpace(String),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("expression is not subtraction-free")]
    NotSubtractionFree,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
