use fatou_core::cantor::{
    digit_base, digit_decompose, ells_from_beta, u_sequence, verify_affine_identity, BetaSeq,
};
use fatou_core::PrimeParams;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn betas() -> impl Strategy<Value = BetaSeq> {
    (prop::collection::vec(0u8..=1, 0..=6), 0u8..=1)
        .prop_map(|(prefix, tail)| BetaSeq::new(prefix, tail).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn u_steps_are_one_or_two(beta in betas()) {
        let u = u_sequence(&beta, 64);
        prop_assert_eq!(u[0], 0);
        for w in u.windows(2) {
            prop_assert!(matches!(w[1] - w[0], 1 | 2));
        }
    }

    #[test]
    fn ells_follow_u(beta in betas(), p in prop_oneof![Just(2u32), Just(3)]) {
        let params = PrimeParams::derive(p).unwrap();
        let q = params.q();
        let spec = ells_from_beta(&params, &beta);
        prop_assert_eq!(spec.ell(0), 0);
        // the prefix plus three full cycles
        let horizon = spec.prefix_len() + 3 * spec.cycle_len();
        let u = u_sequence(&beta, (horizon / q + 2) as usize);
        for s in 0..horizon {
            let (v, r) = (s / q, s % q);
            prop_assert_eq!(spec.ell(s), (q + 1) * u[v as usize] - v + r);
        }
    }

    #[test]
    fn affine_identity_holds_at_p2(beta in betas()) {
        let report = verify_affine_identity(&PrimeParams::derive(2).unwrap(), &beta);
        prop_assert!(report.affine_holds, "{} vs {}", report.affine, report.series);
        prop_assert!(report.block_form_holds);
    }

    #[test]
    fn digits_reconstruct(raw in prop::collection::vec(0u32..(1 << 24), 1..=4)) {
        let params = PrimeParams::derive(2).unwrap();
        let base = digit_base(&params);
        let b = BigRational::from_integer(base.clone());
        let mut tau = BigRational::from_integer(0.into());
        let mut w = BigRational::from_integer(1.into());
        for d in &raw {
            w /= &b;
            tau += BigRational::from_integer(BigInt::from(*d)) * &w;
        }
        let dec = digit_decompose(&tau, &params).unwrap();
        prop_assert!(dec.passed);
        prop_assert_eq!(&dec.reconstruction, &tau);
        for (m, d) in dec.digits().iter().enumerate().skip(1) {
            prop_assert_eq!(d, &BigInt::from(raw[m - 1]));
        }
    }
}
