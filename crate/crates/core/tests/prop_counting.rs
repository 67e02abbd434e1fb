use kloosterman_core::counting::{additive_energy, j_count_brute, j_count_fast, CountQuery, JCounter};
use kloosterman_core::divisor::TauTable;
use kloosterman_core::modarith::{factorize, gcd, mod_inv, mul_mod, next_prime};
use kloosterman_core::moments::{holder_rhs, m_profile, moment};
use kloosterman_core::Interval;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn j_fast_matches_brute(q in 1u64..400, a in 0i64..400, kf in 0.0f64..1.0) {
        let k = ((q as f64 * kf) as u64).clamp(1, q);
        let query = CountQuery::new(&factorize(q), a, k).unwrap();
        prop_assert_eq!(j_count_fast(&query), j_count_brute(&query));
    }

    #[test]
    fn j_is_monotone_and_reflects(q in 2u64..500, a in 0u64..500) {
        let c = JCounter::new(q);
        let up = c.counts_up_to(a % q);
        let neg = c.counts_up_to((q - a % q) % q);
        prop_assert!(up.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(&up, &neg);
        // At K = q every unit k1 with k1^{-1} - a a unit contributes once.
        let full = (1..=q).filter(|&k| gcd(k, q) == 1 && mod_inv(k as i64, q).is_ok_and(|i| gcd((i + q - a % q) % q, q) == 1)).count() as u64;
        prop_assert_eq!(up[q as usize - 1], full);
    }

    #[test]
    fn restricted_count_is_dominated(q in 2u64..300, pick in 0usize..64, a in 0u64..300, c in 1u64..300, kf in 0.0f64..1.0) {
        let divisors = factorize(q).divisors();
        let r = divisors[pick % divisors.len()];
        prop_assume!(r == 1 || gcd(c % r, r) == 1);
        let c = if r == 1 { 0 } else { c % r };
        let k = ((r as f64 * kf) as u64).clamp(1, r);
        let lhs = JCounter::new(q).count_restricted(a % q, k, r, c);
        let ci = if r == 1 { 0 } else { mod_inv(c as i64, r).unwrap() };
        let rhs = (q / r) * JCounter::new(r).count(mul_mod(ci, a % r, r), k);
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn energy_bounds(p in 3u64..300, a in prop::collection::vec(0u64..300, 1..40), b in prop::collection::vec(0u64..300, 1..40)) {
        let p = next_prime(p);
        let eab = additive_energy(&a, &b, p).unwrap() as u128;
        let ea = additive_energy(&a, &a, p).unwrap() as u128;
        let eb = additive_energy(&b, &b, p).unwrap() as u128;
        prop_assert!(eab * eab <= ea * eb);
        let sa = a.iter().map(|x| x % p).collect::<std::collections::BTreeSet<_>>().len() as u128;
        prop_assert!(ea >= sa * sa && ea <= sa * sa * sa);
    }

    #[test]
    fn moments_respect_orthogonality_and_holder(p in 3u64..400, nf in 0.05f64..0.5, alpha in 1.0f64..1.7) {
        let p = next_prime(p);
        let n = ((p as f64).powf(nf) as u64).clamp(1, p - 1);
        let prof = m_profile(p, &Interval::initial(n).unwrap()).unwrap();
        let ceiling = (p * p * n) as f64;
        prop_assert!(prof.full_square_sum() <= ceiling * (1.0 + 1e-9));
        let m = moment(&prof, alpha).unwrap();
        prop_assert!(m <= holder_rhs(&prof, 1, alpha).unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn divisor_classes_partition(x in 1u64..20_000, q in 1u64..300) {
        let tau = TauTable::new(x).unwrap();
        let classes = tau.class_sums(q);
        prop_assert_eq!(classes.iter().sum::<u64>(), (1..=x).map(|d| x / d).sum::<u64>());
        for b in (0..q).filter(|&b| gcd(b, q) == 1) {
            prop_assert_eq!(tau.sum_ap(b as i64, q).unwrap(), classes[b as usize]);
        }
    }
}
