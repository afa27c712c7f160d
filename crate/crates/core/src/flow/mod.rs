//! Ball dynamics at the level of diameter exponents.
//!
//! A ball centered on the constructed orbit is pushed through the itinerary
//! `0^{m_0} 1^{M_0} 0^{m_1} 1^{M_1} ...` one iterate at a time. Each step picks
//! the tame, wild or affine rule by comparing exponents; the schedule's
//! prediction of where the wild rule fires is checked, not assumed.

mod certify;
mod export;
mod state;
mod verify;

pub use certify::{certify_component, CheckpointGap, ComponentCertificate, Verdict};
pub use export::{trace_to_csv, trace_to_json};
pub use state::{
    propagate, propagate_capped, step, BallState, Phase, Propagation, Rule, Trace, TraceEvent,
    DEFAULT_TRACE_CAP,
};
pub use verify::{
    verify_diameter_theorem, verify_diameter_theorem_from, CheckpointKind, CheckpointRecord,
    DiameterReport,
};

use crate::scale::Exponent;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("step {step}: diameter {diam} sits exactly on the wild threshold at level {level}")]
    Boundary {
        step: u64,
        level: u64,
        diam: Exponent,
    },
    #[error("step {step}: diameter {diam} is not below {limit} in {phase}")]
    BallTooLarge {
        step: u64,
        phase: Phase,
        diam: Exponent,
        limit: Exponent,
    },
    #[error("inconsistent ball state: {0}")]
    InvalidState(String),
    #[error("{0}")]
    InvalidArgument(String),
}

impl FlowError {
    /// Time index of the failing step, when the error came from a step.
    pub fn step(&self) -> Option<u64> {
        match self {
            FlowError::Boundary { step, .. } | FlowError::BallTooLarge { step, .. } => Some(*step),
            _ => None,
        }
    }
}
