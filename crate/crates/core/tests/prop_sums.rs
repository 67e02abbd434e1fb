use kloosterman_core::bilinear::{Bilinear, Interval, Path, WeightVector};
use kloosterman_core::expsums::{
    gauss_star, gauss_star_mobius, kloosterman_brute, kloosterman_fast, ramanujan, salie, t_transform_brute,
    t_transform_fast, weil_bound_rhs,
};
use kloosterman_core::modarith::{factorize, gcd, mod_inv, reduce};
use num_complex::Complex64;
use proptest::prelude::*;

fn modulus_and_pair() -> impl Strategy<Value = (u64, i64, i64)> {
    (1u64..600).prop_flat_map(|q| (Just(q), 0..q as i64, 0..q as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_matches_brute((q, m, n) in modulus_and_pair(), g in 1u64..4) {
        // Scaling both arguments by a common factor exercises the non-unit strata.
        let f = factorize(q);
        let (m, n) = (m * g as i64, n * g as i64);
        let fast = kloosterman_fast(m, n, &f);
        let brute = kloosterman_brute(m, n, &f);
        prop_assert!((fast.value - brute.value).norm() <= 1e-6 * q as f64);
        prop_assert!(fast.value.im.abs() <= fast.real_tolerance());
        prop_assert!(fast.norm() <= weil_bound_rhs(m, n, &f) + 1e-6);
    }

    #[test]
    fn symmetry_and_unit_scaling((q, m, n) in modulus_and_pair(), c in 1i64..1000) {
        let f = factorize(q);
        let k = kloosterman_fast(m, n, &f).value;
        prop_assert!((k - kloosterman_fast(n, m, &f).value).norm() <= 1e-6 * q as f64);
        if gcd(reduce(c, q), q) == 1 {
            let scaled = kloosterman_fast(c * m, n, &f).value;
            let moved = kloosterman_fast(m, c * n, &f).value;
            prop_assert!((scaled - moved).norm() <= 1e-6 * q as f64);
        }
    }

    #[test]
    fn twisted_multiplicativity(a in 1u64..60, b in 1u64..60, m in 0i64..3600, n in 0i64..3600) {
        prop_assume!(gcd(a, b) == 1);
        let (fa, fb, fq) = (factorize(a), factorize(b), factorize(a * b));
        let ib = mod_inv(b as i64, a).map(|v| v as i64).unwrap_or(0);
        let ia = mod_inv(a as i64, b).map(|v| v as i64).unwrap_or(0);
        let lhs = kloosterman_fast(m, n, &fq).value;
        let rhs = kloosterman_fast(ib * m, ib * n, &fa).value * kloosterman_fast(ia * m, ia * n, &fb).value;
        prop_assert!((lhs - rhs).norm() <= 1e-6 * (a * b) as f64);
    }

    #[test]
    fn ramanujan_is_kloosterman_at_zero(q in 1u64..2000, m in -5000i64..5000) {
        let f = factorize(q);
        let c = ramanujan(m, &f);
        prop_assert!((kloosterman_brute(m, 0, &f).value - Complex64::new(c as f64, 0.0)).norm() <= 1e-6 * q as f64);
        prop_assert!(c.unsigned_abs() <= gcd(reduce(m, q), q));
    }

    #[test]
    fn gauss_star_expansion((q, m, n) in modulus_and_pair()) {
        let f = factorize(q);
        let direct = gauss_star(m, n, q).value;
        let expanded = gauss_star_mobius(m, n, &f).value;
        prop_assert!((direct - expanded).norm() <= 1e-8 * q as f64);
    }

    #[test]
    fn salie_has_square_root_size(k in 1u64..400, m in 1i64..800, n in 1i64..800) {
        let q = 2 * k + 1;
        let f = factorize(q);
        prop_assume!(gcd(reduce(m * n, q), q) == 1);
        let s = salie(m, n, &f).unwrap();
        prop_assert!(s.norm() <= 2.0f64.powi(f.factors().len() as i32) * (q as f64).sqrt() + 1e-6);
    }

    #[test]
    fn transform_fast_matches_brute(q in 1u64..200, x in 0i64..200, y in 0i64..200, z in 0i64..200) {
        let f = factorize(q);
        let fast = t_transform_fast(x, y, z, &f).value;
        let brute = t_transform_brute(x, y, z, &f).value;
        prop_assert!((fast - brute).norm() <= 1e-6 * (q as f64).powf(1.5));
    }

    #[test]
    fn bilinear_paths_agree(
        q in 2u64..400,
        off_m in -400i64..400,
        off_n in -400i64..400,
        m in 1u64..20,
        n in 1u64..20,
        a in 0i64..400,
        phases in prop::collection::vec(0.0f64..std::f64::consts::TAU, 40),
    ) {
        let (m, n) = (m.min(q), n.min(q));
        let b = Bilinear::for_modulus(q);
        let w = |len: u64, shift: usize| phases.iter().cycle().skip(shift).take(len as usize).map(|&t| Complex64::from_polar(1.0, t)).collect::<Vec<_>>();
        let alpha = WeightVector::on_interval(Interval::new(off_m, m).unwrap(), w(m, 0)).unwrap();
        let beta = WeightVector::on_interval(Interval::new(off_n, n).unwrap(), w(n, 20)).unwrap();
        let tol = 1e-6 * (q as f64).powf(1.5);
        let d = b.type2(&alpha, &beta, a, Path::Direct).unwrap().value;
        let f = b.type2(&alpha, &beta, a, Path::Dft).unwrap().value;
        prop_assert!((d - f).norm() <= tol);
        let j = Interval::new(off_n, n).unwrap();
        let d = b.type1(&alpha, &j, a, Path::Direct).unwrap().value;
        let f = b.type1(&alpha, &j, a, Path::Dft).unwrap().value;
        prop_assert!((d - f).norm() <= tol);
        let d = b.type1_product(&alpha, &j, a, Path::Direct).unwrap().value;
        let f = b.type1_product(&alpha, &j, a, Path::Dft).unwrap().value;
        prop_assert!((d - f).norm() <= tol);
    }
}
