use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid pair ({i}, {j}) for n = {n}")]
    InvalidPair { i: usize, j: usize, n: usize },
    #[error("graph with {n} vertices exceeds the exact clique search cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),
    #[error("Rabi frequency is required to compute the blockade radius")]
    MissingRabi,
    #[error("physical parameter `{name}` must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("register dimensionality must be 2 or 3, got {0}")]
    BadDims(usize),

    #[error("point set is empty")]
    EmptyPointSet,
    #[error("invalid hydrophobic positions: {0}")]
    BadPositions(String),
    #[error("number of colors must be at least 1")]
    BadColors,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("embedding is already three-dimensional")]
    AlreadyThreeD,
    #[error("a model needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("distance vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("size mismatch: embedding has {embedding} points, graph has {graph} vertices")]
    SizeMismatch { embedding: usize, graph: usize },

    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
