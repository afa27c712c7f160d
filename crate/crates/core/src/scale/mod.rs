//! Exact exponent arithmetic: the constants of the family, the block
//! schedule, and the closed-form sums over eventually periodic `l` sequences.

mod ells;
mod exponent;
mod params;
mod schedule;

pub use ells::EllSpec;
pub use exponent::{format_ratio, inv_pow, parse_ratio, pow_int, Exponent, ExponentInterval};
pub use params::{derive_constants, is_prime, PrimeParams};
pub use schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScaleError {
    #[error("p = {0} is not a prime")]
    NotPrime(u32),
    #[error("invalid l-sequence: {0}")]
    InvalidEllSpec(String),
    #[error("cannot parse rational `{0}`")]
    ParseRational(String),
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("interval enclosure needs at least one term")]
    TruncationTerms,
}
