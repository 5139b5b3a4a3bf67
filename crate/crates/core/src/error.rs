use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "weight a_{t} is not representable for schedule {schedule}; use ratio accessors instead"
    )]
    WeightOverflow { schedule: String, t: u64 },

    #[error("sum of weights up to T={horizon} is not representable (log-sum {log_sum:.3}); exponential weights violate the o(sqrt(T)) log condition")]
    WeightSumOverflow { horizon: u64, log_sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite {what} at coordinate {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("no step has been taken yet")]
    NoStepTaken,

    #[error("cannot parse schedule {input:?}; valid forms: constant, poly:<alpha>, accadagrad, exp:<beta>")]
    ScheduleParse { input: String },

    #[error("unknown optimizer {name:?}; valid names: {}", crate::optimizers::OPTIMIZER_NAMES.join(", "))]
    UnknownOptimizer { name: String },

    #[error("unknown problem {name:?}; valid names: {}", crate::problems::PROBLEM_NAMES.join(", "))]
    UnknownProblem { name: String },

    #[error("csv parse error at row {row}, column {column}: {message}")]
    CsvParse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no finite run to select from")]
    NoFiniteRun,

    #[error("empty trace set")]
    EmptyTraces,

    #[error("momentum step bound violated at t={t}: lhs {lhs} > rhs {rhs}")]
    Lemma2Violation { t: u64, lhs: f64, rhs: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse: {0}")]
    ConfigParse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
