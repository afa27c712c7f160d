use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::scale::{format_ratio, inv_pow, pow_int, PrimeParams};

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

fn ser_int<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    fn holds(self, lhs: &BigRational, rhs: &BigRational) -> bool {
        match self {
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Le => lhs <= rhs,
        }
    }
}

/// One exact comparison `lhs rel rhs` in the argument that `R'` is nonzero.
#[derive(Clone, Debug, Serialize)]
pub struct ChainLink {
    pub label: &'static str,
    #[serde(serialize_with = "ser_ratio")]
    pub lhs: BigRational,
    pub relation: Relation,
    #[serde(serialize_with = "ser_ratio")]
    pub rhs: BigRational,
    pub holds: bool,
}

fn link(label: &'static str, lhs: BigRational, relation: Relation, rhs: BigRational) -> ChainLink {
    let holds = relation.holds(&lhs, &rhs);
    ChainLink {
        label,
        lhs,
        relation,
        rhs,
        holds,
    }
}

/// Constants for the affine parametrization of the attainable diameters by
/// base `P^2` bit expansions.
#[derive(Clone, Debug, Serialize)]
pub struct CantorConstants {
    pub p: u32,
    pub q: u64,
    #[serde(rename = "P", serialize_with = "ser_int")]
    pub big_p: BigInt,
    #[serde(rename = "Q", serialize_with = "ser_int")]
    pub big_q: BigInt,
    #[serde(rename = "E", serialize_with = "ser_ratio")]
    pub e: BigRational,
    #[serde(rename = "F", serialize_with = "ser_ratio")]
    pub f: BigRational,
    #[serde(rename = "R", serialize_with = "ser_ratio")]
    pub r: BigRational,
    #[serde(rename = "R_prime", serialize_with = "ser_ratio")]
    pub r_prime: BigRational,
    pub r_prime_nonzero: bool,
    pub chain: Vec<ChainLink>,
    pub chain_holds: bool,
}

impl CantorConstants {
    pub fn failed_links(&self) -> impl Iterator<Item = &ChainLink> {
        self.chain.iter().filter(|l| !l.holds)
    }
}

pub fn cantor_constants(params: &PrimeParams) -> CantorConstants {
    let p = params.p() as u64;
    let q = params.q();
    let kappa = params.kappa().clone();
    let w = 2 * (p - 1).pow(3);
    let one = BigRational::one();

    let big_p = pow_int(p, q * (q + 1));
    let big_q = pow_int(p, w * (q + 1));
    let rp = BigRational::from_integer(big_p.clone());
    let rq = BigRational::from_integer(big_q.clone());

    let inner: BigRational = (0..q - 1).map(|r| inv_pow(p, (q + 1) * r)).sum();
    let e = (&one - &kappa * inv_pow(p, w)) * inner + inv_pow(p, q * q - 1);
    // weight of the last index of a block, where l jumps by (q+1)du - q
    let f = &kappa * BigRational::from_integer(pow_int(p, w * q)) * inv_pow(p, q * q - 1) / &e;

    let pp = &rp * &rp;
    let r = &e * (&one - &f / (&rq * &rq)) * &pp / (&pp - &one);
    let hi = (&one - &f / &rq) * (&one + one.clone() / &rp);
    let lo = &one - &f / (&rq * &rq);
    let r_prime = &e * (&hi - &lo);

    let pw = BigRational::from_integer(pow_int(p, w));
    let fp = &f * &rp;
    let bound_a = BigRational::from_integer(pow_int(p, q + 1)) * inv_pow(p, w * (q - 1));
    let bound_b = if q >= 3 {
        inv_pow(p, q - 3)
    } else {
        BigRational::from_integer(pow_int(p, 3 - q))
    };
    let lower_hi = (&one - one.clone() / (&rq * &rp)) * (&one + one.clone() / &rp);

    let chain = vec![
        link("E > 0", e.clone(), Relation::Gt, BigRational::zero()),
        link("kappa <= 1", kappa.clone(), Relation::Le, one.clone()),
        link("p^w E >= p^w - kappa", &pw * &e, Relation::Ge, &pw - &kappa),
        link("p^w - kappa >= 1", &pw - &kappa, Relation::Ge, one.clone()),
        link(
            "FP <= p^(q+1) / p^(w(q-1))",
            fp,
            Relation::Le,
            bound_a.clone(),
        ),
        link(
            "p^(q+1) / p^(w(q-1)) <= p^-(q-3)",
            bound_a,
            Relation::Le,
            bound_b.clone(),
        ),
        link("p^-(q-3) <= 1", bound_b, Relation::Le, one.clone()),
        link(
            "(1 - F/Q)(1 + 1/P) >= (1 - 1/(QP))(1 + 1/P)",
            hi.clone(),
            Relation::Ge,
            lower_hi.clone(),
        ),
        link(
            "(1 - 1/(QP))(1 + 1/P) > 1",
            lower_hi,
            Relation::Gt,
            one.clone(),
        ),
        link("1 > 1 - F/Q^2", one, Relation::Gt, lo),
    ];
    let chain_holds = chain.iter().all(|l| l.holds);

    CantorConstants {
        p: params.p(),
        q,
        big_p,
        big_q,
        r_prime_nonzero: !r_prime.is_zero(),
        e,
        f,
        r,
        r_prime,
        chain,
        chain_holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn p2_sizes() {
        let c = cantor_constants(&PrimeParams::derive(2).unwrap());
        assert_eq!(c.big_p, BigInt::from(1) << 12);
        assert_eq!(c.big_q, BigInt::from(1) << 8);
        assert!(c.e.is_positive());
        assert!(c.r_prime_nonzero);
    }

    #[test]
    fn p2_values_by_hand() {
        // q = 3, kappa = 4/7, w = 2:
        // E = (1 - 1/7)(1 + 1/16) + 1/256 = 1639/1792
        // F = (4/7) 2^6 / 2^8 / E = 256/1639
        let c = cantor_constants(&PrimeParams::derive(2).unwrap());
        assert_eq!(c.e, BigRational::new(1639.into(), 1792.into()));
        assert_eq!(c.f, BigRational::new(256.into(), 1639.into()));
    }

    #[test]
    fn p3_r_prime_nonzero() {
        let c = cantor_constants(&PrimeParams::derive(3).unwrap());
        assert!(c.r_prime_nonzero);
        assert_eq!(c.chain.len(), 10);
    }
}
