use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::CantorError;
use crate::scale::{format_ratio, pow_int, PrimeParams};

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

fn ser_int<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

fn ser_ints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|n| n.to_string()))
}

/// Finite expansion `sum_m d(m) / B^m`, with `d(0)` first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DigitExpansion {
    #[serde(serialize_with = "ser_int")]
    pub base: BigInt,
    #[serde(serialize_with = "ser_ints")]
    pub digits: Vec<BigInt>,
}

impl DigitExpansion {
    pub fn value(&self) -> BigRational {
        weighted_sum(&self.base, &self.digits)
    }
}

fn weighted_sum(base: &BigInt, coeffs: &[BigInt]) -> BigRational {
    // Horner from the last digit
    let b = BigRational::from_integer(base.clone());
    coeffs.iter().rev().fold(BigRational::zero(), |acc, d| {
        acc / &b + BigRational::from_integer(d.clone())
    })
}

/// `tau` split as a sum of `B - 1` bit expansions `tau^(j)`, where
/// `beta^(j)(m) = 1` iff `j <= d(m)`.
#[derive(Clone, Debug, Serialize)]
pub struct DigitDecomposition {
    pub p: u32,
    #[serde(serialize_with = "ser_ratio")]
    pub tau: BigRational,
    #[serde(flatten)]
    pub expansion: DigitExpansion,
    /// `#{ j in 1..B-1 : beta^(j)(m) = 1 }` for each `m`.
    #[serde(serialize_with = "ser_ints")]
    pub counts: Vec<BigInt>,
    pub counts_match: bool,
    /// `sum_j tau^(j)`, obtained from the counts.
    #[serde(serialize_with = "ser_ratio")]
    pub reconstruction: BigRational,
    pub reconstruction_holds: bool,
    pub passed: bool,
}

impl DigitDecomposition {
    pub fn base(&self) -> &BigInt {
        &self.expansion.base
    }

    pub fn digits(&self) -> &[BigInt] {
        &self.expansion.digits
    }

    /// `beta^(j)(m)`; zero past the last digit.
    pub fn beta(&self, j: &BigInt, m: usize) -> u8 {
        match self.expansion.digits.get(m) {
            Some(d) if j.is_positive() && j < &self.expansion.base && j <= d => 1,
            _ => 0,
        }
    }

    /// `tau^(j) = sum_m beta^(j)(m) / B^m`.
    pub fn tau_j(&self, j: &BigInt) -> BigRational {
        let bits: Vec<BigInt> = (0..self.expansion.digits.len())
            .map(|m| BigInt::from(self.beta(j, m)))
            .collect();
        weighted_sum(&self.expansion.base, &bits)
    }
}

pub fn digit_base(params: &PrimeParams) -> BigInt {
    let q = params.q();
    pow_int(params.p() as u64, 2 * q * (q + 1))
}

pub fn digit_decompose(
    tau: &BigRational,
    params: &PrimeParams,
) -> Result<DigitDecomposition, CantorError> {
    if tau.is_negative() || tau >= &BigRational::one() {
        return Err(CantorError::TauOutOfRange(format_ratio(tau)));
    }
    let base = digit_base(params);
    let p = BigInt::from(params.p());

    // the reduced denominator must be p^j, then B^k with k = ceil(j / log_p B) clears it
    let mut den = tau.denom().clone();
    let mut j = 0u64;
    while !den.is_one() {
        let (quot, rem) = den.div_rem(&p);
        if !rem.is_zero() {
            return Err(CantorError::InfiniteExpansion {
                tau: format_ratio(tau),
                base: base.to_string(),
            });
        }
        den = quot;
        j += 1;
    }
    let per_digit = 2 * params.q() * (params.q() + 1);
    let k = j.div_ceil(per_digit) as usize;

    let scaled = tau * BigRational::from_integer(num_traits::pow(base.clone(), k));
    debug_assert!(scaled.is_integer());
    let mut n: BigInt = scaled.to_integer();
    let mut digits = vec![BigInt::zero(); k + 1];
    for m in (1..=k).rev() {
        let (quot, rem) = n.div_rem(&base);
        digits[m] = rem;
        n = quot;
    }
    // tau < 1 leaves nothing for d(0)
    digits[0] = n;

    let top: BigInt = &base - 1;
    let counts: Vec<BigInt> = digits
        .iter()
        .map(|d| d.clone().min(top.clone()).max(BigInt::zero()))
        .collect();
    let counts_match = counts == digits;
    let reconstruction = weighted_sum(&base, &counts);
    let reconstruction_holds = &reconstruction == tau;

    Ok(DigitDecomposition {
        p: params.p(),
        tau: tau.clone(),
        expansion: DigitExpansion { base, digits },
        counts,
        counts_match,
        reconstruction,
        reconstruction_holds,
        passed: counts_match && reconstruction_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> PrimeParams {
        PrimeParams::derive(2).unwrap()
    }

    fn big_b() -> BigInt {
        BigInt::from(1u64 << 24)
    }

    #[test]
    fn base_is_two_to_24() {
        assert_eq!(digit_base(&p2()), big_b());
    }

    #[test]
    fn zero() {
        let d = digit_decompose(&BigRational::zero(), &p2()).unwrap();
        assert!(d.digits().iter().all(Zero::is_zero));
        assert!(d.passed);
        assert!(d.tau_j(&BigInt::one()).is_zero());
    }

    #[test]
    fn one_over_b() {
        let tau = BigRational::new(1.into(), big_b());
        let d = digit_decompose(&tau, &p2()).unwrap();
        assert_eq!(d.digits(), &[BigInt::zero(), BigInt::one()]);
        assert_eq!(d.beta(&BigInt::one(), 1), 1);
        assert_eq!(d.beta(&BigInt::one(), 0), 0);
        assert_eq!(d.beta(&BigInt::from(2), 1), 0);
        assert!(d.passed);
    }

    #[test]
    fn five_then_three() {
        let b = BigRational::from_integer(big_b());
        let tau = BigRational::from_integer(5.into()) / &b
            + BigRational::from_integer(3.into()) / (&b * &b);
        let d = digit_decompose(&tau, &p2()).unwrap();
        assert_eq!(
            d.counts,
            vec![BigInt::zero(), BigInt::from(5), BigInt::from(3)]
        );
        assert!(d.passed);
        // brute force over the j that can be nonzero
        let sum: BigRational = (1..=5).map(|j| d.tau_j(&BigInt::from(j))).sum();
        assert_eq!(sum, tau);
        assert!(d.tau_j(&BigInt::from(6)).is_zero());
    }

    #[test]
    fn half_needs_one_digit() {
        let d = digit_decompose(&BigRational::new(1.into(), 2.into()), &p2()).unwrap();
        assert_eq!(d.digits()[1], BigInt::from(1u64 << 23));
        assert!(d.passed);
    }

    #[test]
    fn rejects_bad_tau() {
        let one = BigRational::one();
        assert!(matches!(
            digit_decompose(&one, &p2()),
            Err(CantorError::TauOutOfRange(_))
        ));
        let neg = BigRational::new((-1).into(), 4.into());
        assert!(matches!(
            digit_decompose(&neg, &p2()),
            Err(CantorError::TauOutOfRange(_))
        ));
        let third = BigRational::new(1.into(), 3.into());
        assert!(matches!(
            digit_decompose(&third, &p2()),
            Err(CantorError::InfiniteExpansion { .. })
        ));
    }
}
