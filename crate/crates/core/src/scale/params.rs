use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::exponent::{inv_pow, pow_int, rat_int, Exponent};
use super::ScaleError;

/// The prime `p` together with the derived integer `q` and the rational `kappa`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeParams {
    p: u32,
    q: u64,
    #[serde(serialize_with = "ser_ratio")]
    kappa: BigRational,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&super::exponent::format_ratio(r))
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeParams {
    /// `q = (p-1)(2p^2-2p-1)` and `kappa = p^(2p-2) / (p^(2p-1) - p + 1)`.
    pub fn derive(p: u32) -> Result<Self, ScaleError> {
        if !is_prime(p) {
            return Err(ScaleError::NotPrime(p));
        }
        let pp = p as u64;
        let q = (pp - 1) * (2 * pp * pp - 2 * pp - 1);
        let kappa = BigRational::new(
            pow_int(pp, 2 * pp - 2),
            pow_int(pp, 2 * pp - 1) - BigInt::from(pp) + 1,
        );
        Ok(Self { p, q, kappa })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub(crate) fn p64(&self) -> u64 {
        self.p as u64
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn kappa(&self) -> &BigRational {
        &self.kappa
    }

    /// `(p-1)^2`, the width factor relating `s` to block indices.
    pub fn block_width(&self) -> u64 {
        let pm1 = self.p64() - 1;
        pm1 * pm1
    }

    /// `c_m = -(1/(p-1)) (1 - p^-m)`, the exponent of `rho_m(a)`.
    pub fn rho_exponent(&self, m: u64) -> Exponent {
        let pm1 = rat_int(self.p64() - 1);
        let one_minus = rat_int(1) - inv_pow(self.p64(), m);
        Exponent::new(-(one_minus / pm1))
    }

    /// `-1/(p-1)`, the exponent of `rho(a)`, the limit of `c_m`.
    pub fn rho_limit(&self) -> Exponent {
        Exponent::new(-(rat_int(1) / rat_int(self.p64() - 1)))
    }

    /// `p/(p-1)`, the power taking a center norm to its wild threshold.
    pub fn wild_factor(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.p - 1))
    }
}

/// Free-function form of [`PrimeParams::derive`].
pub fn derive_constants(p: u32) -> Result<PrimeParams, ScaleError> {
    PrimeParams::derive(p)
}
