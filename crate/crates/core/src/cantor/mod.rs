//! Bit sequences, the affine family of attainable diameter exponents, and the
//! base `B` digit splitting of a target real.

mod beta;
mod constants;
mod digits;
mod identity;

pub use beta::{ells_from_beta, u_sequence, BetaSeq};
pub use constants::{cantor_constants, CantorConstants, ChainLink, Relation};
pub use digits::{digit_base, digit_decompose, DigitDecomposition, DigitExpansion};
pub use identity::{bit_series, verify_affine_identity, AffineIdentityReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CantorError {
    #[error("invalid beta sequence {0}")]
    InvalidBeta(String),
    #[error("tau = {0} is outside [0, 1)")]
    TauOutOfRange(String),
    #[error("tau = {tau} has no finite expansion in base {base}")]
    InfiniteExpansion { tau: String, base: String },
}
