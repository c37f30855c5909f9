use thiserror::Error;

use crate::digraph::{RayLabel, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseSpecError {
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("unexpected orientation symbol {0:?} (expected '+' or '-')")]
    BadSymbol(char),
    #[error("invalid tail: {0}")]
    InvalidTail(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("ray label ({}, {}) already used", .0.n, .0.m)]
    DuplicateLabel(RayLabel),
    #[error("invalid ray label ({}, {}): n must not exceed m", .0.n, .0.m)]
    InvalidLabel(RayLabel),
    #[error("ray prefix length must be at least 1")]
    EmptyPrefix,
    #[error("cannot identify vertex {0} with itself")]
    SelfIdentification(VertexId),
    #[error("vertex {0} is not live")]
    DeadVertex(VertexId),
    #[error("vertex {0} was already consumed by an identification at step {1}")]
    AlreadyIdentified(VertexId, usize),
    #[error("path enumeration exceeded cap of {0}")]
    CapExceeded(usize),
    #[error("pattern tracing exceeded result cap of {0}")]
    ResultCapExceeded(usize),
    #[error("walk does not realize the pattern at step {0}")]
    NotAnEmbedding(usize),
    #[error("malformed digraph file: {0}")]
    Format(String),
}
