use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::FieldError;

/// `sum_{low <= i < prec} c_i pi^i` with `pi^e = p` and digits in `[0, p-1]`,
/// known modulo `pi^prec`.
///
/// After normalization the lowest stored digit is nonzero, so `low` is the
/// `pi`-adic valuation; an element with no digits is zero to its precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicElement {
    p: u32,
    e: u32,
    low: i64,
    prec: i64,
    digits: Vec<u32>,
}

impl PadicElement {
    /// `O(pi^prec)`.
    pub fn zero(p: u32, e: u32, prec: i64) -> Self {
        Self {
            p,
            e,
            low: prec,
            prec,
            digits: Vec::new(),
        }
    }

    /// `pi^i` to absolute precision `prec`.
    pub fn monomial(p: u32, e: u32, i: i64, prec: i64) -> Self {
        if i >= prec {
            return Self::zero(p, e, prec);
        }
        let mut digits = vec![0; (prec - i) as usize];
        digits[0] = 1;
        Self {
            p,
            e,
            low: i,
            prec,
            digits,
        }
    }

    pub fn from_int(p: u32, e: u32, n: i64, prec: i64) -> Self {
        Self::from_rational(p, e, &Ratio::from_integer(BigInt::from(n)), prec)
    }

    /// The image of a rational number, correct modulo `pi^prec`.
    pub fn from_rational(p: u32, e: u32, x: &Ratio<BigInt>, prec: i64) -> Self {
        if x.is_zero() {
            return Self::zero(p, e, prec);
        }
        let pb = BigInt::from(p);
        let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
        let mut k = 0i64;
        while num.is_multiple_of(&pb) {
            num /= &pb;
            k += 1;
        }
        while den.is_multiple_of(&pb) {
            den /= &pb;
            k -= 1;
        }
        let ei = e as i64;
        let low = ei * k;
        if low >= prec {
            return Self::zero(p, e, prec);
        }
        // base-p digits of the unit modulo p^count land every e positions
        let count = (prec - low + ei - 1) / ei;
        let modulus = num_traits::pow(pb.clone(), count as usize);
        let phi = &modulus / &pb * (&pb - 1u32);
        let inv = den.modpow(&(phi - 1u32), &modulus);
        let mut unit = (num * inv).mod_floor(&modulus);
        let mut digits = vec![0u32; (prec - low) as usize];
        for j in 0..count as usize {
            let (q, r) = unit.div_rem(&pb);
            digits[j * e as usize] = u32::try_from(r).expect("digit below p");
            unit = q;
        }
        Self::normalized(p, e, low, prec, digits.into_iter().map(i64::from).collect())
    }

    /// `pi^low` times a random unit with nonzero leading digit.
    pub fn random_at<R: Rng + ?Sized>(p: u32, e: u32, low: i64, prec: i64, rng: &mut R) -> Self {
        if low >= prec {
            return Self::zero(p, e, prec);
        }
        let mut digits: Vec<u32> = (0..prec - low).map(|_| rng.gen_range(0..p)).collect();
        digits[0] = rng.gen_range(1..p);
        Self {
            p,
            e,
            low,
            prec,
            digits,
        }
    }

    fn normalized(p: u32, e: u32, low: i64, prec: i64, mut acc: Vec<i64>) -> Self {
        let pi = p as i64;
        let step = e as usize;
        for i in 0..acc.len() {
            let v = acc[i];
            let (carry, r) = (v.div_euclid(pi), v.rem_euclid(pi));
            acc[i] = r;
            // carries past the precision are unknown anyway
            if i + step < acc.len() {
                acc[i + step] += carry;
            }
        }
        match acc.iter().position(|&d| d != 0) {
            None => Self::zero(p, e, prec),
            Some(first) => Self {
                p,
                e,
                low: low + first as i64,
                prec,
                digits: acc[first..].iter().map(|&d| d as u32).collect(),
            },
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Index of the lowest nonzero digit, `None` when zero to precision.
    pub fn valuation_index(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }

    /// Valuation normalized by `v(p) = 1`.
    pub fn valuation(&self) -> Option<Ratio<i64>> {
        self.valuation_index().map(|i| Ratio::new(i, self.e as i64))
    }

    /// Coefficient of `pi^i`; zero below the valuation, `None` at or past the precision.
    pub fn digit(&self, i: i64) -> Option<u32> {
        if i >= self.prec {
            None
        } else if i < self.low {
            Some(0)
        } else {
            Some(self.digits[(i - self.low) as usize])
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), FieldError> {
        if self.p != other.p || self.e != other.e {
            return Err(FieldError::Mismatch {
                left: (self.p, self.e),
                right: (other.p, other.e),
            });
        }
        Ok(())
    }

    fn nonzero(self) -> Result<Self, FieldError> {
        if self.is_zero() {
            Err(FieldError::PrecisionExhausted { prec: self.prec })
        } else {
            Ok(self)
        }
    }

    fn linear(&self, other: &Self, sign: i64) -> Self {
        let prec = self.prec.min(other.prec);
        let low = self.low.min(other.low).min(prec);
        let mut acc = vec![0i64; (prec - low) as usize];
        for (i, slot) in acc.iter_mut().enumerate() {
            let pos = low + i as i64;
            let a = self.digit(pos).unwrap_or(0) as i64;
            let b = other.digit(pos).unwrap_or(0) as i64;
            *slot = a + sign * b;
        }
        Self::normalized(self.p, self.e, low, prec, acc)
    }

    /// Sum, zero to precision allowed.
    pub fn add_raw(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same(other)?;
        Ok(self.linear(other, 1))
    }

    /// Difference, zero to precision allowed.
    pub fn sub_raw(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same(other)?;
        Ok(self.linear(other, -1))
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.add_raw(other)?.nonzero()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.sub_raw(other)?.nonzero()
    }

    pub fn neg(&self) -> Self {
        Self::zero(self.p, self.e, self.prec).linear(self, -1)
    }

    /// Product; the precision is `min(N_x + v_y, N_y + v_x)`.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same(other)?;
        let (Some(vx), Some(vy)) = (self.valuation_index(), other.valuation_index()) else {
            return Err(FieldError::PrecisionExhausted {
                prec: self.prec.min(other.prec),
            });
        };
        let prec = (self.prec + vy).min(other.prec + vx);
        let low = vx + vy;
        let len = (prec - low) as usize;
        let acc = convolve(
            &self.digits[..len.min(self.digits.len())],
            &other.digits[..len.min(other.digits.len())],
            len,
        );
        Self::normalized(self.p, self.e, low, prec, acc).nonzero()
    }

    pub fn pow(&self, n: u32) -> Result<Self, FieldError> {
        if n == 0 {
            return Ok(Self::from_int(self.p, self.e, 1, self.prec));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Digits from the valuation up, lowest first.
    pub fn dump(&self) -> ElementDump {
        ElementDump {
            p: self.p,
            e: self.e,
            low: self.low,
            prec: self.prec,
            digits: self
                .digits
                .iter()
                .map(|d| char::from_digit(*d, 36).unwrap_or('?'))
                .collect(),
        }
    }
}

impl fmt::Display for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(pi^{})", self.prec);
        }
        let mut first = true;
        for (k, d) in self.digits.iter().enumerate() {
            if *d == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{d}*pi^{}", self.low + k as i64)?;
            first = false;
        }
        write!(f, " + O(pi^{})", self.prec)
    }
}

/// First `len` coefficients of the digit-polynomial product, via one big
/// integer multiplication with a 64-bit slot per digit.
fn convolve(x: &[u32], y: &[u32], len: usize) -> Vec<i64> {
    let pack = |d: &[u32]| {
        let mut words = vec![0u32; 2 * d.len()];
        for (i, &v) in d.iter().enumerate() {
            words[2 * i] = v;
        }
        BigUint::new(words)
    };
    let words = (pack(x) * pack(y)).to_u32_digits();
    (0..len)
        .map(|k| {
            let lo = words.get(2 * k).copied().unwrap_or(0) as u64;
            let hi = words.get(2 * k + 1).copied().unwrap_or(0) as u64;
            (lo | (hi << 32)) as i64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementDump {
    pub p: u32,
    pub e: u32,
    pub low: i64,
    pub prec: i64,
    /// Base-`p` digits starting at position `low`.
    pub digits: String,
}

/// Convenience for exact rationals in tests and configs.
pub fn ratio(num: i64, den: i64) -> Ratio<BigInt> {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}
