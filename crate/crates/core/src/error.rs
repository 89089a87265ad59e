use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("price {price} is below marginal cost {cost}")]
    BelowCost { price: f64, cost: f64 },

    #[error("expected {expected} prices, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("unbounded support needs an evaluation cap: {0}")]
    Unbounded(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction failed, condition `{condition}` violated: {detail}")]
    Construction { condition: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
