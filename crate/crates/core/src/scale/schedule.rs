use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ells::EllSpec;
use super::exponent::{inv_pow, pow_int, rat_int, Exponent, ExponentInterval};
use super::params::PrimeParams;
use super::ScaleError;

/// The block schedule `M_k`, `m_k`, `N_i` and the exponent sequences
/// `delta_k`, `tau_s`, `r_s` derived from a prime and an [`EllSpec`].
///
/// Index conventions: `k` and `i` index zero/one block pairs, `s` indexes
/// the special blocks `l_s (p-1)^2` where the ball meets the wild locus.
#[derive(Debug)]
pub struct Schedule {
    params: PrimeParams,
    ells: EllSpec,
    // N_0, N_1, ... filled on demand
    entry_times: Mutex<Vec<u64>>,
}

impl Clone for Schedule {
    fn clone(&self) -> Self {
        Self::new(self.params.clone(), self.ells.clone())
    }
}

impl Schedule {
    pub fn new(params: PrimeParams, ells: EllSpec) -> Self {
        Self {
            params,
            ells,
            entry_times: Mutex::new(vec![0]),
        }
    }

    pub fn params(&self) -> &PrimeParams {
        &self.params
    }

    pub fn ells(&self) -> &EllSpec {
        &self.ells
    }

    fn p(&self) -> u64 {
        self.params.p64()
    }

    pub fn ell(&self, s: u64) -> u64 {
        self.ells.ell(s)
    }

    /// Block index `l_s (p-1)^2` of the `s`-th special block.
    pub fn special_block(&self, s: u64) -> u64 {
        self.ell(s) * self.params.block_width()
    }

    /// The unique `s` with `l_s (p-1)^2 - 1 <= k < l_{s+1} (p-1)^2 - 1`.
    pub fn segment_of(&self, k: u64) -> u64 {
        let target = k + 1;
        // l_s >= s, so the answer lies in [0, k + 1]
        let (mut lo, mut hi) = (0u64, target);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if self.special_block(mid) <= target {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// `Some(s)` when `k = l_{s+1}(p-1)^2 - 1`, the last index summed in block `s`.
    pub fn block_final_segment(&self, k: u64) -> Option<u64> {
        let s1 = self.segment_of(k);
        (s1 >= 1 && self.special_block(s1) == k + 1).then(|| s1 - 1)
    }

    /// `Some(s)` when `i = l_s (p-1)^2`.
    pub fn special_segment(&self, i: u64) -> Option<u64> {
        let s = if i == 0 { 0 } else { self.segment_of(i - 1) };
        (self.special_block(s) == i).then_some(s)
    }

    /// `M_k = 2k + 2 + (2p - 3) l_s`.
    pub fn big_m(&self, k: u64) -> u64 {
        2 * k + 2 + (2 * self.p() - 3) * self.ell(self.segment_of(k))
    }

    /// `m_0 = 2p + 1`, `m_k = (p - 1) M_{k-1} + 2p + 1`.
    pub fn small_m(&self, k: u64) -> u64 {
        let tail = 2 * self.p() + 1;
        if k == 0 {
            tail
        } else {
            (self.p() - 1) * self.big_m(k - 1) + tail
        }
    }

    /// `N_0 = 0`, `N_i = N_{i-1} + m_{i-1} + M_{i-1}`: the time the orbit enters block `i`.
    pub fn entry_time(&self, i: u64) -> u64 {
        let mut cache = self.entry_times.lock().unwrap_or_else(|e| e.into_inner());
        while (cache.len() as u64) <= i {
            let j = cache.len() as u64 - 1;
            let next = cache[j as usize] + self.small_m(j) + self.big_m(j);
            cache.push(next);
        }
        cache[i as usize]
    }

    /// `delta_k = -m_k/(p-1) + p/(p-1)^2 (1 - p^-m_k) + M_k`.
    pub fn delta(&self, k: u64) -> Exponent {
        let p = self.p();
        let m = self.small_m(k);
        let pm1 = rat_int(p - 1);
        let v = -(rat_int(m) / &pm1)
            + rat_int(p) / (&pm1 * &pm1) * (rat_int(1) - inv_pow(p, m))
            + rat_int(self.big_m(k));
        Exponent::new(v)
    }

    /// `delta_k` through the simplified forms: the block-final identity when
    /// `k + 1` is a special block, the all-tame identity otherwise.
    pub fn delta_closed_form(&self, k: u64) -> Exponent {
        let p = self.p();
        let pm1sq = rat_int(self.params.block_width());
        let m = self.small_m(k);
        let core = -(rat_int(2 * p - 3) + inv_pow(p, m - 1)) / pm1sq;
        match self.block_final_segment(k) {
            Some(s) => {
                let jump = self.ells.increment(s);
                Exponent::new(core + rat_int((2 * p - 3) * jump))
            }
            None => Exponent::new(core),
        }
    }

    /// `delta` summed over the indices `l_s(p-1)^2 .. l_{s+1}(p-1)^2 - 1`.
    ///
    /// Term by term, with the `p^-m_k` parts gathered over one power of `p`
    /// so the sum is reduced once.
    pub fn delta_block_sum(&self, s: u64) -> Exponent {
        let p = self.p();
        let pm1 = p - 1;
        let ks = self.special_block(s)..self.special_block(s + 1);
        let top = ks.clone().map(|k| self.small_m(k)).max().unwrap_or(0);
        // (p-1)^2 delta_k = -(p-1) m_k + p + (p-1)^2 M_k - p^(1 - m_k)
        let mut whole = BigInt::zero();
        let mut frac = BigInt::zero();
        for k in ks {
            let m = self.small_m(k);
            whole += BigInt::from(pm1 * pm1 * self.big_m(k) + p) - BigInt::from(pm1 * m);
            frac += pow_int(p, top - m);
        }
        let v = BigRational::new(
            whole * pow_int(p, top) - frac * BigInt::from(p),
            BigInt::from(pm1 * pm1) * pow_int(p, top),
        );
        Exponent::new(v)
    }

    /// Geometric closed form of [`Self::delta_block_sum`].
    pub fn delta_block_sum_closed(&self, s: u64) -> Exponent {
        let p = self.p();
        let q = self.params.q();
        let pm1 = p - 1;
        let g = pow_int(p, 2 * pm1);
        let jump = self.ells.increment(s);
        let head = q * self.ell(s) + 2 * p + 1;
        let fade = 2 * jump * pm1 * pm1 * pm1;
        // -(p/(p-1)^2) g/(g-1) p^-head (1 - p^-fade)
        let num = -(BigInt::from(p) * &g * (pow_int(p, fade) - BigInt::one()));
        let den = BigInt::from(pm1 * pm1) * (g - BigInt::one()) * pow_int(p, head + fade);
        Exponent::new(BigRational::new(num, den))
    }

    /// `tau_s` in closed form.
    pub fn tau(&self, s: u64) -> Exponent {
        let p = self.p();
        let q = self.params.q();
        let pm1 = p - 1;
        let jump = self.ells.increment(s);
        let g = pow_int(p, 2 * pm1);
        let gm1 = &g - BigInt::one();
        // bracket 1/(g-1) + p^-(q j) - g/(g-1) p^-(2 j (p-1)^3), over (g-1) p^d
        let (a, b) = (q * jump, 2 * jump * pm1 * pm1 * pm1);
        let d = a.max(b);
        let num = pow_int(p, d) + &gm1 * pow_int(p, d - a) - g * pow_int(p, d - b);
        let den = BigInt::from(pm1 * pm1) * gm1 * pow_int(p, q * self.ell(s) + 2 * p + d);
        Exponent::new(BigRational::new(num, den))
    }

    /// `tau_s` from its definition: the gap between consecutive `r`-exponents
    /// minus the `delta` block sum.
    pub fn tau_from_deltas(&self, s: u64) -> Exponent {
        let p = self.p();
        let pm1 = rat_int(p - 1);
        let m0 = self.small_m(self.special_block(s));
        let m1 = self.small_m(self.special_block(s + 1));
        let drift = -(rat_int(p) / (&pm1 * &pm1))
            * BigRational::new(pow_int(p, m1 - m0) - BigInt::one(), pow_int(p, m1));
        Exponent::new(drift) - self.delta_block_sum(s)
    }

    /// Strict upper bound `1 / ((p-1)^2 p^(2p))` for every `tau_s`.
    pub fn tau_ceiling(&self) -> Exponent {
        let p = self.p();
        Exponent::new(inv_pow(p, 2 * p) / rat_int(self.params.block_width()))
    }

    /// Exponent of `r_s(a)`: `-(p/(p-1)^2)(1 - p^-(q l_s + 2p + 1))`.
    pub fn r_exponent(&self, s: u64) -> Exponent {
        let p = self.p();
        let m = self.params.q() * self.ell(s) + 2 * p + 1;
        let v = -(rat_int(p) / rat_int(self.params.block_width())) * (rat_int(1) - inv_pow(p, m));
        Exponent::new(v)
    }

    /// Sum over `j >= start` of `term(j)`, where for `j` past the prefix each
    /// full cycle multiplies the term by `p^-(q L + c)` (`L` the cycle sum,
    /// `c` the cycle length).
    fn eventually_periodic_sum(
        &self,
        start: u64,
        term: impl Fn(u64) -> BigRational,
    ) -> BigRational {
        let p = self.p();
        let c = self.ells.cycle_len();
        let ratio = inv_pow(p, self.params.q() * self.ells.cycle_sum() + c);
        let j0 = start.max(self.ells.prefix_len());
        let head: BigRational = (start..j0).map(&term).sum();
        let cycle: BigRational = (j0..j0 + c).map(&term).sum();
        head + cycle / (rat_int(1) - ratio)
    }

    /// `sum_{u >= 0} tau_{s+u} / p^(u+1)`, exact.
    pub fn tail_sum(&self, s: u64) -> Exponent {
        let p = self.p();
        Exponent::new(
            self.eventually_periodic_sum(s, |j| self.tau(j).into_inner() * inv_pow(p, j - s + 1)),
        )
    }

    /// `sum_{u >= 0} tau_{s+u} / p^u`, the exponent offset carried after a wild step.
    pub fn amplified_tail(&self, s: u64) -> Exponent {
        self.tail_sum(s).scale(self.p() as i64)
    }

    /// Partial sum of `terms` terms of [`Self::tail_sum`] plus the certified
    /// majorant `tau_j < p^-(q l_j + 2p) / (p-1)^2` on the remainder.
    pub fn tail_sum_enclosure(&self, s: u64, terms: u64) -> Result<ExponentInterval, ScaleError> {
        if terms == 0 {
            return Err(ScaleError::TruncationTerms);
        }
        let p = self.p();
        let q = self.params.q();
        let partial: BigRational = (0..terms)
            .map(|u| self.tau(s + u).into_inner() * inv_pow(p, u + 1))
            .sum();
        let majorant = inv_pow(p, q * self.ell(s + terms) + 2 * p)
            / rat_int(self.params.block_width())
            * inv_pow(p, terms + 1)
            / (rat_int(1) - inv_pow(p, q + 1));
        let hi = &partial + majorant;
        ExponentInterval::new(Exponent::new(partial), Exponent::new(hi))
    }

    /// `sum_s p^-(q l_s + s) (1 - kappa p^-(2(p-1)^3 (l_{s+1} - l_s)))`.
    pub fn diameter_series(&self) -> BigRational {
        let p = self.p();
        let q = self.params.q();
        let pm1 = p - 1;
        let kappa = self.params.kappa();
        self.eventually_periodic_sum(0, |s| {
            let jump = self.ells.increment(s);
            inv_pow(p, q * self.ell(s) + s)
                * (rat_int(1) - kappa * inv_pow(p, 2 * pm1 * pm1 * pm1 * jump))
        })
    }

    /// The diameter exponent `t` of the wandering component, from the
    /// closed-form series.
    pub fn closed_form_t(&self) -> Exponent {
        let p = self.p();
        let pm1sq = self.params.block_width();
        let num = pow_int(p, 2 * p - 1) - BigInt::from(p) + 1;
        let den = BigInt::from(pm1sq) * pow_int(p, 2 * p + 1) * (pow_int(p, 2 * p - 2) - 1);
        let coeff = BigRational::new(num, den);
        let base = -(rat_int(p) / rat_int(pm1sq));
        Exponent::new(base + coeff * self.diameter_series())
    }

    /// `M_i - m_{i+1}/(p-1) + p/(p-1)^2 (1 - p^-m_{i+1})`, which must be negative
    /// for the itinerary to be realizable.
    pub fn realization_margin(&self, i: u64) -> BigRational {
        let p = self.p();
        let m = self.small_m(i + 1);
        let pm1 = rat_int(p - 1);
        rat_int(self.big_m(i)) - rat_int(m) / &pm1
            + rat_int(p) / (&pm1 * &pm1) * (rat_int(1) - inv_pow(p, m))
    }

    /// Closed form `-(2p^2 - 2p - 1 + p^-(m_{i+1} - 1)) / (p-1)^2` of the margin.
    pub fn realization_margin_closed(&self, i: u64) -> BigRational {
        let p = self.p();
        let m = self.small_m(i + 1);
        -(rat_int(2 * p * p - 2 * p - 1) + inv_pow(p, m - 1)) / rat_int(self.params.block_width())
    }
}

#[cfg(test)]
fn zero_ratio() -> BigRational {
    BigRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(p: u32, ells: &str) -> Schedule {
        Schedule::new(PrimeParams::derive(p).unwrap(), ells.parse().unwrap())
    }

    #[test]
    fn block_sum_is_the_running_sum() {
        for (p, ells) in [
            (2, "id"),
            (3, "prefix=1,3;cycle=2"),
            (5, "prefix=;cycle=1,2"),
        ] {
            let s = sched(p, ells);
            for j in 0..5 {
                let mut acc = Exponent::zero();
                for k in s.special_block(j)..s.special_block(j + 1) {
                    acc += &s.delta(k);
                }
                assert_eq!(s.delta_block_sum(j), acc, "p={p} {ells} s={j}");
            }
        }
    }

    #[test]
    fn block_lengths_identity_p2() {
        let s = sched(2, "id");
        assert_eq!([s.big_m(0), s.big_m(1), s.big_m(2)], [3, 6, 9]);
        assert_eq!([s.small_m(0), s.small_m(1), s.small_m(2)], [5, 8, 11]);
        assert_eq!(
            [s.entry_time(1), s.entry_time(2), s.entry_time(3)],
            [8, 22, 42]
        );
        // s = k + 1 when (p-1)^2 = 1 and l_s = s
        for k in 0..20 {
            assert_eq!(s.segment_of(k), k + 1);
        }
    }

    #[test]
    fn segment_respects_half_open_ranges() {
        for (p, ells) in [
            (2, "prefix=;cycle=2"),
            (3, "id"),
            (3, "prefix=1;cycle=2,1"),
            (5, "cycle=3"),
        ] {
            let sc = sched(p, ells);
            for k in 0..200u64 {
                let s = sc.segment_of(k);
                assert!(sc.special_block(s) <= k + 1);
                assert!(k + 1 < sc.special_block(s + 1));
            }
        }
    }

    #[test]
    fn delta_values() {
        let s = sched(2, "id");
        assert_eq!(s.delta(0), Exponent::ratio(-1, 16));
        assert_eq!(s.delta(1), Exponent::ratio(-1, 128));
        for k in 0..15 {
            // -2^-(3k+4)
            let want = Exponent::new(-inv_pow(2, 3 * k + 4));
            assert_eq!(s.delta(k), want);
            assert_eq!(s.delta_closed_form(k), want);
        }
    }

    #[test]
    fn delta_intermediate_and_block_final_forms_agree() {
        let s = sched(2, "prefix=;cycle=2");
        // l_s = 2s: k = 0, 2, 4 are interior, k = 1, 3, 5 close a block
        assert_eq!(s.block_final_segment(0), None);
        assert_eq!(s.block_final_segment(1), Some(0));
        assert_eq!(s.block_final_segment(2), None);
        for k in 0..12 {
            assert_eq!(s.delta(k), s.delta_closed_form(k), "k={k}");
        }
        let m0 = s.small_m(0);
        assert_eq!(
            s.delta(0),
            Exponent::new(-(rat_int(1) + inv_pow(2, m0 - 1)))
        );
    }

    #[test]
    fn tau_values() {
        let s = sched(2, "id");
        assert_eq!(s.tau(0), Exponent::ratio(1, 128));
        assert_eq!(s.tau(1), Exponent::ratio(1, 1024));
        assert_eq!(s.tau_from_deltas(0), Exponent::ratio(1, 128));
        for j in 0..10 {
            assert_eq!(s.tau(j), Exponent::new(inv_pow(2, 3 * j + 7)));
        }
    }

    #[test]
    fn r_exponent_values() {
        let s = sched(2, "id");
        assert_eq!(s.r_exponent(0), Exponent::ratio(-31, 16));
        assert_eq!(s.r_exponent(1), Exponent::ratio(-255, 128));
        for p in [2u32, 3, 5] {
            let sc = sched(p, "prefix=2;cycle=1,3");
            let pp = p as u64;
            let r0 = -(rat_int(pp) / rat_int((pp - 1) * (pp - 1)))
                * (rat_int(1) - inv_pow(pp, 2 * pp + 1));
            assert_eq!(sc.r_exponent(0).into_inner(), r0);
            for s in 0..6 {
                let via_m = sc
                    .params()
                    .rho_exponent(sc.small_m(sc.special_block(s)))
                    .mul_ratio(&sc.params().wild_factor());
                assert_eq!(sc.r_exponent(s), via_m);
            }
        }
    }

    #[test]
    fn tail_sums_identity_p2() {
        let s = sched(2, "id");
        assert_eq!(s.tail_sum(0), Exponent::ratio(1, 240));
        assert_eq!(s.tail_sum(1), Exponent::ratio(1, 1920));
    }

    #[test]
    fn enclosure_contains_exact_and_is_narrow() {
        let s = sched(2, "id");
        let iv = s.tail_sum_enclosure(0, 10).unwrap();
        assert!(iv.contains(&s.tail_sum(0)));
        assert!(iv.width() < Exponent::new(inv_pow(2, 40)));
        assert!(matches!(
            s.tail_sum_enclosure(0, 0),
            Err(ScaleError::TruncationTerms)
        ));
    }

    #[test]
    fn closed_form_t_identity_p2() {
        let s = sched(2, "id");
        assert_eq!(s.closed_form_t(), Exponent::ratio(-29, 15));
    }

    #[test]
    fn realization_margin_matches_closed_form() {
        for (p, e) in [(2, "id"), (3, "cycle=2"), (5, "prefix=1,3;cycle=2")] {
            let sc = sched(p, e);
            for i in 0..30 {
                let m = sc.realization_margin(i);
                assert_eq!(m, sc.realization_margin_closed(i));
                assert!(m < zero_ratio());
                assert!(sc.big_m(i + 1) >= sc.big_m(i) + 2);
            }
            assert!(sc.big_m(0) >= 2);
        }
    }

    #[test]
    fn entry_times_are_consistent_after_clone() {
        let s = sched(3, "id");
        let n10 = s.entry_time(10);
        let c = s.clone();
        assert_eq!(c.entry_time(10), n10);
        assert_eq!(c.entry_time(3), s.entry_time(3));
    }
}
