use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty set not allowed: {0}")]
    EmptySet(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} needs {needed} but the budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: u64,
        budget: u64,
    },

    #[error("not a tile in box form: {0}")]
    NotATile(String),

    #[error("set function is missing a required property declaration: {0}")]
    MissingDeclaration(&'static str),

    #[error("indicator identity violated: {0}")]
    IndicatorIdentity(String),

    #[error("probability vector not normalized: sum = {0}")]
    NotNormalized(f64),

    #[error("infeasible constraint pattern: {0}")]
    Infeasible(String),

    #[error("evaluator failed on {set:?}: {message}")]
    Evaluator { set: Vec<Vec<i64>>, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
