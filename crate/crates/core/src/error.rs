use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("censoring retry limit exceeded: {attempts} Rademacher draws of shape {rows}x{cols} all failed general position")]
    CensoringLimit { rows: usize, cols: usize, attempts: usize },

    #[error("matrix is rank deficient (sigma_min / sigma_max = {0:e})")]
    RankDeficient(f64),

    #[error("linear program ended with status {0:?}")]
    Lp(LpStatus),

    #[error("exhaustive enumeration needs {faces} faces, budget is {budget}")]
    BudgetExceeded { faces: u128, budget: u128 },

    #[error("{degenerate} of {trials} draws were rank deficient (limit 1%)")]
    DegenerateDraws { degenerate: usize, trials: usize },

    #[error("{indeterminate} of {trials} verdicts were indeterminate (limit 0.1%)")]
    TooManyIndeterminate { indeterminate: usize, trials: usize },

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
