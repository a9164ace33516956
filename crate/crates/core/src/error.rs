use thiserror::Error;

/// Errors raised by the channel computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet size mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed channel file: {0}")]
    MalformedChannel(String),

    #[error("enumeration budget exceeded: {needed} items needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("channel is not binary-input symmetric")]
    NotBims,

    #[error("identical strings have no distinguishing rate")]
    IdenticalStrings,

    #[error("gap underflows double precision at d = {d}; largest usable d is {largest_usable:?}")]
    GapUnderflow { d: usize, largest_usable: Option<usize> },

    #[error("degenerate bounds: {0}")]
    Degenerate(String),

    #[error("dispersion is zero; normal approximation is undefined")]
    ZeroDispersion,
}

pub type Result<T> = std::result::Result<T, Error>;
