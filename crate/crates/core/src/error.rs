use thiserror::Error;

/// Errors raised by table construction, series arithmetic and the experiments.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("index {needed} is outside the computed range 1..={available}")]
    RangeExceeded { needed: u64, available: u64 },

    #[error("tau({n}) does not fit in a signed 128-bit integer")]
    TauOverflow { n: usize },

    #[error("exact tau table limited to n <= {max}, requested {requested}")]
    TauRangeTooLarge { requested: usize, max: usize },

    #[error("prime seed has no value for p = {0}")]
    MissingPrime(u64),

    #[error("prime seed value {value} at p = {p} violates |lambda(p)| <= 2")]
    SeedOutOfRange { p: u64, value: f64 },

    #[error("weight must be an even integer >= 2, got {0}")]
    InvalidWeight(u32),

    #[error("residue {a} is not a unit modulo {q}")]
    NonUnitResidue { a: u64, q: u64 },

    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("divisor series has a non-invertible first coefficient")]
    SingularDivisor,

    #[error("local factor at p = {0} does not have constant term 1")]
    BadLocalFactor(u64),

    #[error("least-squares fit needs at least 3 grid points, got {0}")]
    GridTooShort(usize),

    #[error("sieve range {requested} exceeds the limit {limit} (would need {bytes} bytes)")]
    SieveTooLarge { requested: usize, limit: usize, bytes: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tau cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
