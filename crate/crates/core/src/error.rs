use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("missing runtime record for instance `{instance}`, solver `{solver}`")]
    MissingRecord { instance: String, solver: String },

    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value for feature {feature} of instance `{instance}`")]
    NonFinite { instance: String, feature: usize },

    #[error("instance `{instance}`, solver `{solver}`: solved in {time_ms} ms, not below the timeout {timeout_ms} ms")]
    RuntimeExceedsTimeout { instance: String, solver: String, time_ms: u64, timeout_ms: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("k = {k} exceeds the {available} instances available")]
    KTooLarge { k: usize, available: usize },

    #[error("empty training set")]
    EmptyTraining,

    #[error("cannot split {instances} instances into {folds} folds")]
    TooManyFolds { folds: usize, instances: usize },

    #[error("{0}")]
    Runner(String),
}

pub type Result<T> = std::result::Result<T, Error>;
