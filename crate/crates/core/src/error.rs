use std::time::Duration;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point has {got} values, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value {value} of feature {feature} is outside its domain")]
    OutOfDomain { feature: usize, value: i64 },
    #[error("categorical group {group} is not one-hot")]
    GroupNotOneHot { group: usize },
    #[error("feature set splits categorical group {group}")]
    SplitGroup { group: usize },
    #[error("feature index {0} out of range")]
    UnknownFeature(usize),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("invalid model: {0}")]
    Invalid(Violation),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("free space of {size} points exceeds the exact-count ceiling {ceiling}")]
    CeilingExceeded { size: String, ceiling: u64 },
    #[error("{what} exceeds the brute-force limit of {limit}")]
    SizeLimit { what: &'static str, limit: usize },
    #[error("oracle call exceeded its {0:?} budget")]
    OracleTimeout(Duration),
    #[error("approximate count interrupted after {rounds_completed} rounds")]
    PartialCount {
        rounds_completed: usize,
        estimates: Vec<String>,
    },
    #[error("total budget of {0:?} exhausted")]
    BudgetExhausted(Duration),
    #[error("empty AXp set")]
    EmptyAxpSet,
    #[error("parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("row {row}, column {column}: {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },
    #[error("malformed DIMACS: {0}")]
    Dimacs(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_timeout(&self) -> bool {
        matches!(
            self,
            Error::OracleTimeout(_) | Error::PartialCount { .. } | Error::BudgetExhausted(_)
        )
    }
}
