use thiserror::Error;

use crate::spaces::IndexSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// A search ended without a witness: data, not a malfunction.
    pub fn is_not_found(&self) -> bool {
        matches!(self, Error::SynthesisFailed(_) | Error::BudgetExhausted(_) | Error::NotFound(_))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("index set mismatch: {left:?} vs {right:?}")]
    IndexSetMismatch { left: IndexSet, right: IndexSet },

    #[error("index {0} is negative but the index set is the naturals")]
    NegativeIndex(i64),

    #[error("norm mismatch within one computation")]
    NormMismatch,

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overflow: weight product magnitude 2^{log2:.1} exceeds 2^900")]
    Overflow { log2: f64 },

    #[error("operator is not invertible: {0}")]
    NotInvertible(String),

    #[error("indecisive: {0}")]
    Indecisive(String),

    #[error("synthesis failed: {0}")]
    SynthesisFailed(String),

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("not found in the searched range: {0}")]
    NotFound(String),

    #[error("witness verification failed: {0}")]
    VerificationFailed(String),

    #[error("input is not a witness family: {0}")]
    InputNotAWitnessFamily(String),

    #[error("family too short: {0}")]
    FamilyTooShort(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
