use fatou_core::{EllSpec, Exponent, PrimeParams, Schedule};
use proptest::prelude::*;

fn schedules() -> impl Strategy<Value = Schedule> {
    (
        prop_oneof![Just(2u32), Just(3), Just(5)],
        prop::collection::vec(1u64..=3, 0..=4),
        prop::collection::vec(1u64..=3, 1..=3),
    )
        .prop_map(|(p, prefix, cycle)| {
            Schedule::new(
                PrimeParams::derive(p).unwrap(),
                EllSpec::new(prefix, cycle).unwrap(),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tau_closed_form_matches_definition(s in schedules()) {
        for j in 0..=20 {
            prop_assert_eq!(s.tau(j), s.tau_from_deltas(j), "s = {}", j);
        }
    }

    #[test]
    fn delta_forms_agree(s in schedules()) {
        for k in 0..=20 {
            prop_assert_eq!(s.delta(k), s.delta_closed_form(k), "k = {}", k);
        }
    }

    #[test]
    fn block_sums_close(s in schedules()) {
        for j in 0..=20 {
            prop_assert_eq!(s.delta_block_sum(j), s.delta_block_sum_closed(j), "s = {}", j);
        }
    }

    #[test]
    fn tau_is_positive_and_bounded(s in schedules()) {
        let ceiling = s.tau_ceiling();
        for j in 0..=20 {
            let t = s.tau(j);
            prop_assert!(t.is_positive());
            prop_assert!(t < ceiling);
        }
    }

    #[test]
    fn t_two_routes(s in schedules()) {
        let t = s.closed_form_t();
        prop_assert_eq!(&t, &(s.r_exponent(0) + s.tail_sum(0)));
        let p = s.params().p() as i64;
        prop_assert!(s.r_exponent(0) < t);
        prop_assert!(t < Exponent::ratio(-1, p - 1));
    }

    #[test]
    fn special_blocks_start_at_expected_level(s in schedules()) {
        let p = s.params().p() as u64;
        let q = s.params().q();
        for j in 0..=20 {
            prop_assert_eq!(s.small_m(s.special_block(j)), q * s.ell(j) + 2 * p + 1);
        }
    }

    #[test]
    fn itinerary_is_realizable(s in schedules()) {
        for i in 0..=50 {
            prop_assert!(s.big_m(i + 1) >= s.big_m(i) + 2);
            let margin = s.realization_margin(i);
            prop_assert_eq!(&margin, &s.realization_margin_closed(i));
            prop_assert!(margin < num_rational::BigRational::from_integer(0.into()));
        }
    }

    #[test]
    fn enclosure_contains_exact_tail(s in schedules(), terms in 1u64..6) {
        for j in [0u64, 1, 4] {
            let box_ = s.tail_sum_enclosure(j, terms).unwrap();
            prop_assert!(box_.contains(&s.tail_sum(j)));
        }
    }
}
