use num_bigint::BigUint;
use thiserror::Error;

/// Errors surfaced by the library. `Integrity` marks internal cross-check
/// failures (they indicate a bug, not bad input) and maps to its own CLI
/// exit code, as do the resource-guard variants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("valuation of zero is infinite")]
    InfiniteValuation,

    #[error("CRT moduli are not pairwise coprime")]
    NonCoprimeModuli,

    #[error("cannot factor {value}: no factor below bound {bound} and cofactor is not a certified prime power")]
    FactorBound { value: BigUint, bound: u64 },

    #[error("{what} would need {needed} items, guard is {guard}")]
    GuardExceeded {
        what: &'static str,
        needed: BigUint,
        guard: u64,
    },

    #[error("work budget exceeded after {visited} nodes")]
    BudgetExceeded { visited: u64 },

    #[error("unsupported field for this operation: {0}")]
    UnsupportedField(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
