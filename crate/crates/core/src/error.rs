use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// (alpha, beta, n, k) do not satisfy the Harnack admissibility conditions.
    #[error("inadmissible Harnack parameters: {0}")]
    Inadmissible(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt:e} exceeds the explicit stability limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    /// A field left the open band (floor, 1 - floor) during time stepping.
    #[error("confinement breach at t = {t}: min = {min:e}, max = {max:e}")]
    ConfinementBreach { t: f64, min: f64, max: f64 },

    /// A value fell below the logarithm floor.
    #[error("value {value:e} at point {index} is below the floor {floor:e}")]
    FloorBreach { index: usize, value: f64, floor: f64 },

    #[error("index {index} out of range (valid: {valid})")]
    Index { index: usize, valid: String },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
