use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ScaleError;

/// An exact rational `t` standing for the norm `|a|^t`, with `|a| > 1`.
///
/// Ordering follows the norm: a larger exponent is a strictly larger norm.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exponent(BigRational);

impl Exponent {
    pub fn new(value: BigRational) -> Self {
        Self(value)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics on a zero denominator like `Ratio::new`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// Multiply by an integer.
    pub fn scale(&self, k: i64) -> Self {
        Self(&self.0 * BigInt::from(k))
    }

    pub fn mul_ratio(&self, r: &BigRational) -> Self {
        Self(&self.0 * r)
    }
}

impl From<BigRational> for Exponent {
    fn from(value: BigRational) -> Self {
        Self(value)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(&self.0))
    }
}

impl FromStr for Exponent {
    type Err = ScaleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ratio(s).map(Self)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Exponent> for &'a Exponent {
    type Output = Exponent;
    fn add(self, rhs: &'a Exponent) -> Exponent {
        Exponent(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Exponent> for Exponent {
    fn add_assign(&mut self, rhs: &Exponent) {
        self.0 += &rhs.0;
    }
}

impl Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 - rhs.0)
    }
}

impl<'a> Sub<&'a Exponent> for &'a Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &'a Exponent) -> Exponent {
        Exponent(&self.0 - &rhs.0)
    }
}

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-self.0)
    }
}

/// Closed enclosure `[lo, hi]` of an exponent known only up to a certified tail bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentInterval {
    lo: Exponent,
    hi: Exponent,
}

impl ExponentInterval {
    pub fn new(lo: Exponent, hi: Exponent) -> Result<Self, ScaleError> {
        if lo > hi {
            return Err(ScaleError::InvalidInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &Exponent {
        &self.lo
    }

    pub fn hi(&self) -> &Exponent {
        &self.hi
    }

    pub fn width(&self) -> Exponent {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Exponent) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Render a rational as `num/den` in lowest terms; integers keep the `/1`.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `n`, `n/d` or `-n/d`.
pub fn parse_ratio(s: &str) -> Result<BigRational, ScaleError> {
    let bad = || ScaleError::ParseRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() || den.is_negative() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn pow_int(base: u64, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// `base^(-exp)` as an exact rational.
pub fn inv_pow(base: u64, exp: u64) -> BigRational {
    BigRational::new(BigInt::one(), pow_int(base, exp))
}

#[cfg(test)]
pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn rat_int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}
