use thiserror::Error;

use crate::oracle::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {0} queried against itself")]
    SelfPair(Vertex),

    #[error("vertex {vertex} outside [1, {n}]")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("bias must lie in (0, 1], got {0}")]
    InvalidBias(f64),

    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("duplicate vertex {0} in vertex set")]
    DuplicateVertex(Vertex),

    #[error("position {position} out of range for graph on {len} vertices")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("cannot split {len} vertices into {k} clusters")]
    TooManyClusters { k: usize, len: usize },

    #[error("eigendecomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("need {needed} vertices, only {available} available")]
    InsufficientVertices { needed: usize, available: usize },

    #[error("set of size {available} is smaller than the required {needed}")]
    SubsetTooSmall { needed: usize, available: usize },

    #[error("degree filter left {survivors} vertices, fewer than h = {h}")]
    DegenerateFilter { survivors: usize, h: usize },

    #[error("gap index h = {h} must lie in [1, {max}]")]
    InvalidIndex { h: usize, max: usize },

    #[error("malformed size list: {0}")]
    MalformedSizes(String),

    #[error("exhaustive search refused for n = {n} (limit {limit})")]
    BruteForceTooLarge { n: usize, limit: usize },

    #[error("eta^2/b = {ratio} is below the admissible floor {floor}")]
    Inadmissible { ratio: f64, floor: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
