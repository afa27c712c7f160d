use std::fmt;

use serde::Serialize;

use super::FlowError;
use crate::scale::{Exponent, Schedule};

/// Which of the two unit disks the orbit is in: `B(0)` during a zero block,
/// `B(1)` during a one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    #[serde(rename = "zero_block")]
    Zero,
    #[serde(rename = "one_block")]
    One,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Zero => "zero_block",
            Phase::One => "one_block",
        })
    }
}

/// Which case of the contraction/expansion lemma moved the diameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `diam + c_{m-1}`: the ball sits below the wild threshold of its sphere.
    Tame,
    /// `1 + p * diam`: the ball straddles the wild ramification locus.
    Wild,
    /// `diam + 1`: inside `B(1)` the map scales distances by `|a|`.
    Affine,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Tame => "tame",
            Rule::Wild => "wild",
            Rule::Affine => "affine",
        })
    }
}

/// A ball centered on the constructed orbit, `time` iterations in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallState {
    time: u64,
    block: u64,
    phase: Phase,
    position: u64,
    level: u64,
    diam: Exponent,
}

impl BallState {
    /// Start of block 0 with center level `m_0` and diameter exponent `d0`.
    pub fn initial(schedule: &Schedule, d0: Exponent) -> Self {
        Self {
            time: 0,
            block: 0,
            phase: Phase::Zero,
            position: 0,
            level: schedule.small_m(0),
            diam: d0,
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// Center norm is `rho_level(a)`; meaningful only in a zero block.
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn diam(&self) -> &Exponent {
        &self.diam
    }

    /// True at position 0 of a zero block, i.e. at time `N_block`.
    pub fn at_block_start(&self) -> bool {
        self.phase == Phase::Zero && self.position == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    /// Time the map was applied from; the diameter is the one at `step + 1`.
    pub step: u64,
    pub rule: Rule,
    pub diam_after: Exponent,
    pub block_index: u64,
    pub phase: Phase,
    pub level: u64,
}

/// Apply `P_a` once to the ball.
pub fn step(schedule: &Schedule, state: &BallState) -> Result<(BallState, TraceEvent), FlowError> {
    let params = schedule.params();
    let at = state.time;
    let (rule, diam) = match state.phase {
        Phase::Zero => {
            let m = state.level;
            if m == 0 || m + state.position != schedule.small_m(state.block) {
                return Err(FlowError::InvalidState(format!(
                    "level {m} at position {} of zero block {}",
                    state.position, state.block
                )));
            }
            let center = params.rho_exponent(m);
            if state.diam >= center {
                return Err(FlowError::BallTooLarge {
                    step: at,
                    phase: Phase::Zero,
                    diam: state.diam.clone(),
                    limit: center,
                });
            }
            let threshold = center.mul_ratio(&params.wild_factor());
            if state.diam == threshold {
                return Err(FlowError::Boundary {
                    step: at,
                    level: m,
                    diam: state.diam.clone(),
                });
            }
            if state.diam < threshold {
                (Rule::Tame, &state.diam + &params.rho_exponent(m - 1))
            } else {
                let p = params.p() as i64;
                (Rule::Wild, Exponent::from_integer(1) + state.diam.scale(p))
            }
        }
        Phase::One => {
            if !state.diam.is_negative() {
                return Err(FlowError::BallTooLarge {
                    step: at,
                    phase: Phase::One,
                    diam: state.diam.clone(),
                    limit: Exponent::zero(),
                });
            }
            (Rule::Affine, &state.diam + &Exponent::from_integer(1))
        }
    };

    let event = TraceEvent {
        step: at,
        rule,
        diam_after: diam.clone(),
        block_index: state.block,
        phase: state.phase,
        level: state.level,
    };

    let mut next = BallState {
        time: at + 1,
        block: state.block,
        phase: state.phase,
        position: state.position + 1,
        level: state.level,
        diam,
    };
    match state.phase {
        Phase::Zero => {
            next.level -= 1;
            if next.position == schedule.small_m(state.block) {
                next.phase = Phase::One;
                next.position = 0;
            }
        }
        Phase::One => {
            if next.position == schedule.big_m(state.block) {
                next.block += 1;
                next.phase = Phase::Zero;
                next.position = 0;
                next.level = schedule.small_m(next.block);
            }
        }
    }
    Ok((next, event))
}

/// Recorded events of a propagation. Every event is kept until `cap` is
/// reached; past it only events at block starts are stored.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub dropped: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Propagation {
    pub trace: Trace,
    pub final_state: BallState,
}

pub const DEFAULT_TRACE_CAP: usize = 1 << 20;

pub fn propagate(schedule: &Schedule, d0: Exponent, steps: u64) -> Result<Propagation, FlowError> {
    propagate_capped(schedule, d0, steps, DEFAULT_TRACE_CAP)
}

pub fn propagate_capped(
    schedule: &Schedule,
    d0: Exponent,
    steps: u64,
    cap: usize,
) -> Result<Propagation, FlowError> {
    let mut state = BallState::initial(schedule, d0);
    let mut trace = Trace::default();
    for _ in 0..steps {
        let was_checkpoint = state.at_block_start();
        let (next, event) = step(schedule, &state)?;
        if trace.events.len() < cap || was_checkpoint {
            trace.events.push(event);
        } else {
            trace.dropped += 1;
        }
        state = next;
    }
    Ok(Propagation {
        trace,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::PrimeParams;

    fn sched(p: u32, ells: &str) -> Schedule {
        Schedule::new(PrimeParams::derive(p).unwrap(), ells.parse().unwrap())
    }

    fn zero_state(level: u64, block_len: u64, diam: Exponent) -> BallState {
        BallState {
            time: 0,
            block: 0,
            phase: Phase::Zero,
            position: block_len - level,
            level,
            diam,
        }
    }

    #[test]
    fn wild_then_tame_then_affine() {
        let s = sched(2, "id");
        let st = BallState::initial(&s, Exponent::ratio(-29, 15));
        let (st, ev) = step(&s, &st).unwrap();
        assert_eq!(ev.rule, Rule::Wild);
        assert_eq!(st.diam(), &Exponent::ratio(-43, 15));
        assert_eq!(st.level(), 4);
        let (st, ev) = step(&s, &st).unwrap();
        assert_eq!(ev.rule, Rule::Tame);
        assert_eq!(st.diam(), &Exponent::ratio(-449, 120));

        let one = BallState {
            time: 5,
            block: 0,
            phase: Phase::One,
            position: 0,
            level: 0,
            diam: Exponent::ratio(-599, 120),
        };
        let (after, ev) = step(&s, &one).unwrap();
        assert_eq!(ev.rule, Rule::Affine);
        assert_eq!(after.diam(), &Exponent::ratio(-479, 120));
    }

    #[test]
    fn boundary_is_an_error() {
        let s = sched(2, "id");
        let st = zero_state(1, 5, Exponent::from_integer(-1));
        assert!(matches!(
            step(&s, &st),
            Err(FlowError::Boundary { level: 1, .. })
        ));
    }

    #[test]
    fn oversized_balls_are_rejected() {
        let s = sched(2, "id");
        let st = zero_state(3, 5, Exponent::ratio(-7, 8));
        assert!(matches!(
            step(&s, &st),
            Err(FlowError::BallTooLarge {
                phase: Phase::Zero,
                ..
            })
        ));
        let one = BallState {
            time: 0,
            block: 0,
            phase: Phase::One,
            position: 1,
            level: 0,
            diam: Exponent::zero(),
        };
        assert!(matches!(
            step(&s, &one),
            Err(FlowError::BallTooLarge {
                phase: Phase::One,
                ..
            })
        ));
    }

    #[test]
    fn inconsistent_level_is_rejected() {
        let s = sched(2, "id");
        let st = zero_state(3, 6, Exponent::from_integer(-5));
        assert!(matches!(step(&s, &st), Err(FlowError::InvalidState(_))));
    }

    #[test]
    fn zero_steps_is_identity() {
        let s = sched(2, "id");
        let run = propagate(&s, Exponent::ratio(-29, 15), 0).unwrap();
        assert!(run.trace.events.is_empty());
        assert_eq!(run.final_state.diam(), &Exponent::ratio(-29, 15));
    }

    #[test]
    fn first_block_lands_on_checkpoint() {
        let s = sched(2, "id");
        let run = propagate(&s, Exponent::ratio(-29, 15), 8).unwrap();
        assert_eq!(run.final_state.diam(), &Exponent::ratio(-239, 120));
        assert_eq!(run.final_state.block(), 1);
        assert!(run.final_state.at_block_start());
        let rules: Vec<Rule> = run.trace.events.iter().map(|e| e.rule).collect();
        use Rule::*;
        assert_eq!(
            rules,
            vec![Wild, Tame, Tame, Tame, Tame, Affine, Affine, Affine]
        );
        let run = propagate(&s, Exponent::ratio(-29, 15), 22).unwrap();
        // r_2 + tail_2 = -2 + 2^-10 + 2^-10/15
        assert_eq!(run.final_state.diam(), &Exponent::ratio(-1919, 960));
    }

    #[test]
    fn cap_keeps_block_starts() {
        let s = sched(2, "id");
        let run = propagate_capped(&s, Exponent::ratio(-29, 15), 42, 3).unwrap();
        let steps: Vec<u64> = run.trace.events.iter().map(|e| e.step).collect();
        assert_eq!(steps, vec![0, 1, 2, 8, 22]);
        assert_eq!(run.trace.dropped, 42 - 5);
    }
}
