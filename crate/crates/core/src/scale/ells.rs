use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ScaleError;

/// A strictly increasing sequence `l_0 = 0, l_1, l_2, ...` given by its
/// increments: a finite prefix followed by a cycle repeated forever.
///
/// Textual form is `id` (all increments 1) or `prefix=a,b;cycle=c,d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EllSpec {
    prefix: Vec<u64>,
    cycle: Vec<u64>,
}

impl EllSpec {
    pub fn new(prefix: Vec<u64>, cycle: Vec<u64>) -> Result<Self, ScaleError> {
        if cycle.is_empty() {
            return Err(ScaleError::InvalidEllSpec("cycle must be nonempty".into()));
        }
        if prefix.iter().chain(cycle.iter()).any(|&d| d == 0) {
            return Err(ScaleError::InvalidEllSpec(
                "increments must be at least 1".into(),
            ));
        }
        Ok(Self { prefix, cycle })
    }

    /// `l_s = s`.
    pub fn identity() -> Self {
        Self {
            prefix: Vec::new(),
            cycle: vec![1],
        }
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[u64] {
        &self.cycle
    }

    pub fn prefix_len(&self) -> u64 {
        self.prefix.len() as u64
    }

    pub fn cycle_len(&self) -> u64 {
        self.cycle.len() as u64
    }

    pub fn cycle_sum(&self) -> u64 {
        self.cycle.iter().sum()
    }

    /// `l_{s+1} - l_s`.
    pub fn increment(&self, s: u64) -> u64 {
        let pl = self.prefix_len();
        if s < pl {
            self.prefix[s as usize]
        } else {
            self.cycle[((s - pl) % self.cycle_len()) as usize]
        }
    }

    pub fn ell(&self, s: u64) -> u64 {
        let pl = self.prefix_len();
        if s <= pl {
            return self.prefix[..s as usize].iter().sum();
        }
        let base: u64 = self.prefix.iter().sum();
        let past = s - pl;
        let full = past / self.cycle_len();
        let part = (past % self.cycle_len()) as usize;
        base + full * self.cycle_sum() + self.cycle[..part].iter().sum::<u64>()
    }

    pub fn is_identity(&self) -> bool {
        self.prefix.iter().chain(self.cycle.iter()).all(|&d| d == 1)
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<u64>, ScaleError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|_| ScaleError::InvalidEllSpec(format!("bad {what} entry `{tok}`")))
        })
        .collect()
}

impl FromStr for EllSpec {
    type Err = ScaleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "id" {
            return Ok(Self::identity());
        }
        let mut prefix = None;
        let mut cycle = None;
        for part in s.split(';') {
            let (key, val) = part.split_once('=').ok_or_else(|| {
                ScaleError::InvalidEllSpec(format!("expected key=value in `{part}`"))
            })?;
            match key.trim() {
                "prefix" if prefix.is_none() => prefix = Some(parse_list(val, "prefix")?),
                "cycle" if cycle.is_none() => cycle = Some(parse_list(val, "cycle")?),
                other => {
                    return Err(ScaleError::InvalidEllSpec(format!(
                        "unexpected key `{other}`"
                    )))
                }
            }
        }
        let cycle = cycle.ok_or_else(|| ScaleError::InvalidEllSpec("missing cycle".into()))?;
        Self::new(prefix.unwrap_or_default(), cycle)
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for EllSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() && self.cycle == [1] {
            return f.write_str("id");
        }
        write!(
            f,
            "prefix={};cycle={}",
            join(&self.prefix),
            join(&self.cycle)
        )
    }
}

impl Serialize for EllSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EllSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}
