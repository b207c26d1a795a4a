use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid neighborhood: {0}")]
    Neighborhood(String),

    #[error("invalid rule: {0}")]
    Rule(String),

    #[error("wolfram number {0} out of range 0..=255")]
    WolframRange(u32),

    #[error("invalid quantity: {0}")]
    Quantity(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("torus modulus {modulus} on axis {axis} must exceed {min_exclusive}")]
    TorusModulus {
        axis: usize,
        modulus: usize,
        min_exclusive: usize,
    },

    #[error("divergent total: background symbol {0} is not a vacuum state")]
    DivergentTotal(usize),

    #[error("background not quiescent: f({0},...,{0}) = {1}")]
    BackgroundNotQuiescent(usize, usize),

    #[error("quantity has no vacuum state")]
    EmptyVacuum,

    #[error("requires nonnegative quantity")]
    NegativeQuantity,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operation requires a one-dimensional interval neighborhood")]
    NotOneDimensional,

    #[error("cap exceeded: {needed} candidates > cap {cap}")]
    CapExceeded { needed: String, cap: u128 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("incompatible displacement totals: no symbol carries {0} particles")]
    IncompatibleTotals(i64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
