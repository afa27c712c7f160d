use serde::Serialize;

use super::state::{step, BallState};
use super::FlowError;
use crate::scale::{Exponent, Schedule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// The larger ball broke a step precondition at this time.
    Escapes { step: u64 },
    /// Nothing decided within the step budget.
    Inconclusive { budget: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckpointGap {
    pub s: u64,
    pub time: u64,
    pub difference: Exponent,
    /// Both traces applied the same rule at every step since the previous
    /// special checkpoint.
    pub lockstep: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentCertificate {
    pub t: Exponent,
    pub t_prime: Exponent,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// `t'_s - t_s` at the successive special checkpoints.
    pub difference_trace: Vec<Exponent>,
    pub checkpoints: Vec<CheckpointGap>,
}

/// Run the component ball (exponent `t`) and a concentric larger ball
/// (exponent `t_prime`) side by side until the larger one leaves the regime
/// where the lemma applies, or `budget` steps elapse.
pub fn certify_component(
    schedule: &Schedule,
    t_prime: Exponent,
    budget: u64,
) -> Result<ComponentCertificate, FlowError> {
    let t = schedule.closed_form_t();
    if t_prime < t {
        return Err(FlowError::InvalidArgument(format!(
            "t' = {t_prime} must not be below t = {t}"
        )));
    }
    let mut inner = BallState::initial(schedule, t.clone());
    let mut outer = BallState::initial(schedule, t_prime.clone());
    let mut checkpoints = Vec::new();
    let mut lockstep = true;
    let mut next_special = 0u64;
    let mut next_special_time = schedule.entry_time(schedule.special_block(0));
    let mut verdict = Verdict::Inconclusive { budget };

    for n in 0..budget {
        if n == next_special_time {
            checkpoints.push(CheckpointGap {
                s: next_special,
                time: n,
                difference: outer.diam() - inner.diam(),
                lockstep,
            });
            lockstep = true;
            next_special += 1;
            next_special_time = schedule.entry_time(schedule.special_block(next_special));
        }
        let (inner_next, inner_ev) = step(schedule, &inner)?;
        match step(schedule, &outer) {
            Ok((outer_next, outer_ev)) => {
                lockstep &= outer_ev.rule == inner_ev.rule;
                outer = outer_next;
            }
            Err(FlowError::BallTooLarge { step, .. }) => {
                verdict = Verdict::Escapes { step };
                break;
            }
            Err(e) => return Err(e),
        }
        inner = inner_next;
    }

    Ok(ComponentCertificate {
        t,
        t_prime,
        verdict,
        difference_trace: checkpoints.iter().map(|c| c.difference.clone()).collect(),
        checkpoints,
    })
}
