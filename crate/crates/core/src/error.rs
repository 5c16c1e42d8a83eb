use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain")]
    DomainViolation { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density model: {0}")]
    InvalidModel(String),

    #[error("coincident sample points {0} and {1}: edge weight is degenerate")]
    DegenerateEdge(usize, usize),

    #[error("edge ({i}, {j}) received a non-positive or non-finite weight {weight}")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("weight function is not subadditive: h({x}) + h({y}) < h({x} + {y})")]
    NotSubadditive { x: f64, y: f64 },

    #[error("weight function is not increasing between {x} and {y}")]
    NotIncreasing { x: f64, y: f64 },

    #[error("f must be positive on the lattice, got {value} at {point:?}")]
    InvalidField { point: Vec<f64>, value: f64 },

    #[error("vertex id {id} out of range for a graph with {n} vertices")]
    InvalidVertex { id: usize, n: usize },

    #[error("vertices {0} and {1} lie in different connected components")]
    Disconnected(usize, usize),

    #[error("no admissible lambda: the lower bound {lambda_min} is not below 1/2")]
    NoAdmissibleLambda { lambda_min: f64 },

    #[error("inadmissible theorem parameters: {0}")]
    Inadmissible(String),

    #[error("experiment aborted: {0}")]
    ExperimentAborted(String),

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(what: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse { what: what.into(), msg: msg.into() }
    }
}
