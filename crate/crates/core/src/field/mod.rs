//! Truncated arithmetic in `Q_p(pi)`, `pi^e = p`, and seeded random trials of
//! the norm identities the ball propagation relies on.

mod element;
mod lab;

pub use element::{ratio, ElementDump, PadicElement};
pub use lab::{
    check_contraction_lemma, check_perturbation_lemmas, eval_p, iterate, LabCheck, LabConfig,
    LabReport, Perturbation, TrialFailure,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("result vanishes to precision pi^{prec}; increase the precision")]
    PrecisionExhausted { prec: i64 },
    #[error("operands live in different fields: (p, e) = {left:?} vs {right:?}")]
    Mismatch { left: (u32, u32), right: (u32, u32) },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible valuation grid: {0}")]
    Infeasible(String),
}
