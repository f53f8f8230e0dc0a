use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("weight {index} is negative or not finite: {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights has {got} entries but n = {n}")]
    WeightCount { n: usize, got: usize },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("instance exceeds size limit: {what} = {got} > {limit}")]
    Size {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("TLE line {line}: {msg}")]
    Tle { line: usize, msg: String },
    #[error("unsupported orbit: {0}")]
    UnsupportedOrbit(String),
    #[error("embedding refinement failed: {0}")]
    Refinement(String),
    #[error("training diverged: {0}")]
    Training(String),
    #[error("pulse parameters out of range: {0}")]
    Parameter(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
