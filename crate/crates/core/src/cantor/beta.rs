use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::CantorError;
use crate::scale::{EllSpec, PrimeParams};

/// An eventually constant bit sequence: `prefix` then `tail` forever.
///
/// Textual form `101;tail=0`; an empty prefix is written `;tail=1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BetaSeq {
    prefix: Vec<u8>,
    tail: u8,
}

impl BetaSeq {
    pub fn new(prefix: Vec<u8>, tail: u8) -> Result<Self, CantorError> {
        if tail > 1 || prefix.iter().any(|&b| b > 1) {
            return Err(CantorError::InvalidBeta("bits must be 0 or 1".into()));
        }
        Ok(Self { prefix, tail })
    }

    pub fn constant(bit: u8) -> Result<Self, CantorError> {
        Self::new(Vec::new(), bit)
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> u8 {
        self.tail
    }

    pub fn get(&self, m: u64) -> u8 {
        self.prefix.get(m as usize).copied().unwrap_or(self.tail)
    }
}

impl fmt::Display for BetaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.prefix {
            write!(f, "{b}")?;
        }
        write!(f, ";tail={}", self.tail)
    }
}

impl FromStr for BetaSeq {
    type Err = CantorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| CantorError::InvalidBeta(format!("`{s}`: {why}"));
        let (bits, tail) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| bad("expected `bits;tail=b`"))?;
        let tail = tail
            .trim()
            .strip_prefix("tail=")
            .ok_or_else(|| bad("expected `tail=0` or `tail=1`"))?;
        let tail = match tail.trim() {
            "0" => 0,
            "1" => 1,
            _ => return Err(bad("tail must be 0 or 1")),
        };
        let prefix = bits
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(bad("prefix must be a string of 0/1")),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        Self::new(prefix, tail)
    }
}

impl Serialize for BetaSeq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `u_0 = 0`; from an even `u` with `beta(u/2) = 0` jump by 2, otherwise by 1.
pub fn u_sequence(beta: &BetaSeq, count: usize) -> Vec<u64> {
    let mut u = Vec::with_capacity(count);
    let mut cur = 0u64;
    for _ in 0..count {
        u.push(cur);
        cur += u_step(beta, cur);
    }
    u
}

fn u_step(beta: &BetaSeq, u: u64) -> u64 {
    if u.is_multiple_of(2) && beta.get(u / 2) == 0 {
        2
    } else {
        1
    }
}

/// The first `v` from which `u_{v+1} - u_v` is constant, together with that step.
pub(crate) fn u_periodic_start(beta: &BetaSeq) -> (u64, u64) {
    let settled = 2 * beta.prefix.len() as u64;
    let step = if beta.tail == 1 { 1 } else { 2 };
    let (mut v, mut u) = (0u64, 0u64);
    // with tail 0 an odd u past the prefix still takes one unit step
    while u < settled || (step == 2 && u % 2 == 1) {
        u += u_step(beta, u);
        v += 1;
    }
    (v, step)
}

/// `l_{vq + r} = (q + 1) u_v - v + r` for `0 <= r < q`, as increments.
pub fn ells_from_beta(params: &PrimeParams, beta: &BetaSeq) -> EllSpec {
    let q = params.q();
    let block = |du: u64| {
        let mut inc = vec![1u64; (q - 1) as usize];
        inc.push((q + 1) * du - q);
        inc
    };
    let (v0, du) = u_periodic_start(beta);
    let u = u_sequence(beta, v0 as usize + 1);
    let prefix: Vec<u64> = u.windows(2).flat_map(|w| block(w[1] - w[0])).collect();
    EllSpec::new(prefix, block(du)).expect("increments are positive")
}
