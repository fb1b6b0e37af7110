use chrono::NaiveDate;
use thiserror::Error;

use crate::arima::ArimaFit;
use crate::select::Candidate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed CSV: {0}")]
    Parse(String),

    #[error("invalid cell at row {row}, column {column}: {value:?}")]
    Cell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("duplicate region {0:?}")]
    DuplicateRegion(String),

    #[error("no population entry for region {0:?}")]
    MissingPopulation(String),

    #[error("date axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("cannot aggregate an empty list of regions")]
    EmptyAggregate,

    #[error("region {region:?} violates series invariants: {}", violations.join("; "))]
    InvariantViolations {
        region: String,
        violations: Vec<String>,
    },

    #[error("unknown region {0:?}")]
    UnknownRegion(String),

    #[error("lockdown date {date} for {region:?} is after the data window")]
    LockdownOutsideWindow { region: String, date: NaiveDate },

    #[error("out of range: {0}")]
    Range(String),

    #[error("region {0:?} has no confirmed cases")]
    NoCases(String),

    #[error("changepoint offset {eta} outside admissible range [{min}, {max}]")]
    EtaRange { eta: usize, min: usize, max: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid model parameters: {0}")]
    Param(String),

    #[error("optimizer did not converge after {iterations} iterations")]
    Convergence {
        iterations: usize,
        best: Box<ArimaFit>,
    },

    #[error("information matrix is singular; standard errors unavailable")]
    SingularFit { fit: Box<ArimaFit> },

    #[error("no grid candidate converged ({} attempted)", candidates.len())]
    ScanFailed { candidates: Vec<Candidate> },

    #[error("Ljung-Box lag count {lags} must exceed fitted parameter count {fitdf}")]
    DegreesOfFreedom { lags: usize, fitdf: usize },

    #[error("residual series has zero variance")]
    DegenerateResidual,

    #[error("truncation horizon {k} is below the required {required}")]
    Truncation { k: usize, required: usize },

    #[error("expected infectiousness is zero on every day")]
    NoTransmission,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Recovers the fit carried by `Convergence` and `SingularFit`.
    pub fn into_fit(self) -> Option<ArimaFit> {
        match self {
            Error::Convergence { best, .. } => Some(*best),
            Error::SingularFit { fit } => Some(*fit),
            _ => None,
        }
    }
}
