use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    GraphInvalid(String),

    #[error("vertex {vertex} out of range for graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("cannot satisfy generator request: {0}")]
    Unsatisfiable(String),

    #[error("curvature requested between a vertex and itself ({0})")]
    SameVertex(usize),

    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),

    #[error("transport problem too large for the reference solver: {cells} cells > {cap}")]
    TooLarge { cells: usize, cap: usize },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("specification is not linear: {0}")]
    NotLinear(String),

    #[error("influence normalizer is zero")]
    DegenerateNormalizer,

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no rewiring action possible")]
    NoActionPossible,

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
