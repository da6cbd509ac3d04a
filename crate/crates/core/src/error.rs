use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected a positive rational, got {0}")]
    NotPositive(String),
    #[error("the root 1/1 has no mother")]
    Root,
    #[error("generation index must be at least 1")]
    ZeroGeneration,
    #[error("invalid continued fraction: {0}")]
    InvalidContinuedFraction(String),
    #[error("malformed tree path: {0}")]
    MalformedPath(String),
    #[error("empty interval ({0}, {1})")]
    EmptyInterval(String, String),
    #[error("truncated expansion given where an exact value is required")]
    Truncated,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("valuation of zero is infinite")]
    InfiniteValuation,
    #[error("size bound exceeded: {0}")]
    TooLarge(String),
    #[error("chain is reducible")]
    Reducible,
    #[error("chain is periodic with period {0}")]
    Periodic(u64),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
}
