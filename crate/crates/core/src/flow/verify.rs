use std::collections::BTreeSet;

use serde::Serialize;

use super::state::{step, BallState, Rule};
use super::FlowError;
use crate::scale::{Exponent, Schedule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckpointKind {
    /// Time `N_{l_s (p-1)^2}`: expected `r_s + sum_u tau_{s+u} / p^(u+1)`.
    Special { s: u64 },
    /// Time `N_i` with `l_s (p-1)^2 < i <= l_{s+1} (p-1)^2`: expected
    /// `r_s + sum_{j < i} delta_j + sum_u tau_{s+u} / p^u`.
    Intermediate { s: u64, i: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckpointRecord {
    #[serde(flatten)]
    pub kind: CheckpointKind,
    pub time: u64,
    pub expected: Exponent,
    pub actual: Exponent,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiameterReport {
    pub p: u32,
    pub ells: String,
    pub s_max: u64,
    pub t: Exponent,
    pub d0: Exponent,
    pub horizon: u64,
    pub checkpoints: Vec<CheckpointRecord>,
    pub wild_steps: Vec<u64>,
    pub expected_wild_steps: Vec<u64>,
    pub wild_locus_ok: bool,
    pub passed: bool,
}

impl DiameterReport {
    pub fn first_failure(&self) -> Option<&CheckpointRecord> {
        self.checkpoints.iter().find(|c| !c.pass)
    }

    pub fn special(&self) -> impl Iterator<Item = &CheckpointRecord> {
        self.checkpoints
            .iter()
            .filter(|c| matches!(c.kind, CheckpointKind::Special { .. }))
    }
}

/// Start the ball at the closed-form exponent `t` and replay the itinerary up
/// to the special block `s_max`, comparing every checkpoint exactly.
pub fn verify_diameter_theorem(
    schedule: &Schedule,
    s_max: u64,
) -> Result<DiameterReport, FlowError> {
    let t = schedule.closed_form_t();
    verify_diameter_theorem_from(schedule, s_max, t)
}

/// Same as [`verify_diameter_theorem`] with an explicit starting exponent.
pub fn verify_diameter_theorem_from(
    schedule: &Schedule,
    s_max: u64,
    d0: Exponent,
) -> Result<DiameterReport, FlowError> {
    if s_max == 0 {
        return Err(FlowError::InvalidArgument(
            "s_max must be at least 1".into(),
        ));
    }
    let t = schedule.closed_form_t();
    let last_block = schedule.special_block(s_max);
    let horizon = schedule.entry_time(last_block);

    let mut checkpoints = Vec::new();
    let mut wild = Vec::new();
    let mut state = BallState::initial(schedule, d0.clone());

    // running values for the current segment s
    let mut seg = 0u64;
    let mut r_s = schedule.r_exponent(0);
    let mut amplified = schedule.amplified_tail(0);
    let mut delta_acc = Exponent::zero();

    loop {
        if state.at_block_start() {
            let i = state.block();
            if i > 0 {
                // close the index i - 1 of the current segment
                delta_acc += &schedule.delta(i - 1);
                let expected = &(&r_s + &delta_acc) + &amplified;
                checkpoints.push(record(
                    CheckpointKind::Intermediate { s: seg, i },
                    state.time(),
                    expected,
                    state.diam(),
                ));
            }
            if let Some(s) = schedule.special_segment(i) {
                seg = s;
                r_s = schedule.r_exponent(s);
                amplified = schedule.amplified_tail(s);
                delta_acc = Exponent::zero();
                let expected = &r_s + &schedule.tail_sum(s);
                checkpoints.push(record(
                    CheckpointKind::Special { s },
                    state.time(),
                    expected,
                    state.diam(),
                ));
            }
        }
        if state.time() >= horizon {
            break;
        }
        let (next, event) = step(schedule, &state)?;
        if event.rule == Rule::Wild {
            wild.push(event.step);
        }
        state = next;
    }

    let expected_wild: Vec<u64> = (0..s_max)
        .map(|s| schedule.entry_time(schedule.special_block(s)))
        .collect();
    let wild_locus_ok = wild.iter().collect::<BTreeSet<_>>() == expected_wild.iter().collect()
        && wild.len() == expected_wild.len();
    let passed = wild_locus_ok && checkpoints.iter().all(|c| c.pass);

    Ok(DiameterReport {
        p: schedule.params().p(),
        ells: schedule.ells().to_string(),
        s_max,
        t,
        d0,
        horizon,
        checkpoints,
        wild_steps: wild,
        expected_wild_steps: expected_wild,
        wild_locus_ok,
        passed,
    })
}

fn record(
    kind: CheckpointKind,
    time: u64,
    expected: Exponent,
    actual: &Exponent,
) -> CheckpointRecord {
    CheckpointRecord {
        kind,
        time,
        pass: &expected == actual,
        expected,
        actual: actual.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::PrimeParams;

    fn sched(p: u32, ells: &str) -> Schedule {
        Schedule::new(PrimeParams::derive(p).unwrap(), ells.parse().unwrap())
    }

    #[test]
    fn identity_p2_passes() {
        let s = sched(2, "id");
        let rep = verify_diameter_theorem(&s, 5).unwrap();
        assert!(rep.passed, "{:?}", rep.first_failure());
        assert_eq!(rep.t, Exponent::ratio(-29, 15));
        let specials: Vec<(u64, String)> = rep
            .special()
            .map(|c| (c.time, c.actual.to_string()))
            .collect();
        assert_eq!(specials[1], (8, "-239/120".to_string()));
        assert_eq!(specials[2], (22, "-1919/960".to_string()));
        assert_eq!(rep.wild_steps, vec![0, 8, 22, 42, 68]);
    }

    #[test]
    fn spaced_sequence_has_tame_interior_blocks() {
        let s = sched(2, "prefix=;cycle=2");
        let rep = verify_diameter_theorem(&s, 3).unwrap();
        assert!(rep.passed, "{:?}", rep.first_failure());
        // only blocks 0, 2, 4 go wild
        let expect: Vec<u64> = [0, 2, 4].iter().map(|&i| s.entry_time(i)).collect();
        assert_eq!(rep.wild_steps, expect);
    }

    #[test]
    fn perturbed_start_fails_at_first_checkpoint() {
        let s = sched(2, "id");
        let d0 = Exponent::ratio(-29, 15) + Exponent::ratio(1, 100);
        let rep = verify_diameter_theorem_from(&s, 5, d0).unwrap();
        assert!(!rep.passed);
        let first = rep.first_failure().unwrap();
        assert_eq!(first.kind, CheckpointKind::Special { s: 0 });
        assert_eq!(first.time, 0);
    }

    #[test]
    fn s_max_zero_is_rejected() {
        let s = sched(2, "id");
        assert!(matches!(
            verify_diameter_theorem(&s, 0),
            Err(FlowError::InvalidArgument(_))
        ));
    }
}
