use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field modulus {0}: must be a prime in [2, 65536]")]
    InvalidField(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("inner dimension {k} is smaller than the rank {rank}")]
    InfeasibleInnerDim { k: usize, rank: usize },
    #[error("factor matrices do not evaluate to the reduced tensor")]
    NotACpd,
    #[error("oracle enumeration of {needed} candidates exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
