use std::path::PathBuf;

use crate::diagnostics::End;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point at k = {k}: {what}")]
    SingularPoint { k: f64, what: &'static str },

    #[error("k = {k} outside tabulated range [{lo}, {hi}]")]
    OutOfTable { k: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge for {what}: value {value:e} +/- {error:e} after {panels} panels")]
    Quadrature {
        what: String,
        value: f64,
        error: f64,
        panels: usize,
    },

    #[error("inconclusive verdict for {what}: {reason}")]
    Inconclusive { what: String, reason: String },

    #[error("{pairing} diverges at the {end} end (local exponent {exponent:.3})")]
    Divergent {
        pairing: String,
        end: End,
        exponent: f64,
    },

    #[error("hamiltonian is unbounded below: R_1 diverges ({0})")]
    UnboundedBelow(String),

    #[error("infinitely many soft bosons: R_2 diverges on the region ({0})")]
    InfiniteSoftBosons(String),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("oracle dimension {dimension} exceeds budget {budget}")]
    Budget { dimension: usize, budget: usize },

    #[error("truncation inadequate: {0}")]
    Truncation(String),

    #[error("n_max sweep did not converge: {0:?}")]
    NotConverged(Vec<(usize, f64)>),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("internal consistency violated: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for verdicts that could not be certified either way.
    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Error::Inconclusive { .. } | Error::Quadrature { .. })
    }
}
