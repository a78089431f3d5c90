use hyperkl_core::closed::{kl3_closed, kl4_vanishing_check};
use hyperkl_core::corr::{c_a_fourier, c_a_reduced, frak_c1, CorrelationParams, FrakCParams};
use hyperkl_core::expsum::{hyper_kloosterman_brute, kloosterman_s, ramanujan_sum};
use hyperkl_core::harness::{discrepancy_scan, fmt_g17, poisson_check, twisted_sum, BumpFunction, DEFAULT_DELTA};
use hyperkl_core::hecke::{tau_table, CoefficientTable};
use hyperkl_core::residue::{inv_mod, PrimePowerModulus, UnitResidue};
use num_integer::Integer;
use proptest::prelude::*;
use std::sync::OnceLock;

fn tau() -> &'static CoefficientTable {
    static TABLE: OnceLock<CoefficientTable> = OnceLock::new();
    TABLE.get_or_init(|| tau_table(20_000).unwrap())
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![5u64, 7, 11, 13])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kl3_closed_matches_brute(p in small_prime(), a in 1i64..10_000) {
        prop_assume!(a as u64 % p != 0);
        let m = PrimePowerModulus::new(p, 2).unwrap();
        let closed = kl3_closed(a, &m).unwrap();
        let brute = hyper_kloosterman_brute(3, &UnitResidue::new(a, m.q()).unwrap(), m.q()).unwrap();
        prop_assert!((closed - brute).norm() < 1e-9);
    }

    #[test]
    fn kl3_closed_is_conjugation_odd(p in small_prime(), k in 2u32..4, a in 1i64..10_000) {
        prop_assume!(a as u64 % p != 0);
        let m = PrimePowerModulus::new(p, k).unwrap();
        let v = kl3_closed(a, &m).unwrap();
        let w = kl3_closed(-a, &m).unwrap();
        prop_assert!((v.conj() - w).norm() < 1e-12);
        prop_assert!(v.norm() <= 3.0 + 1e-12);
    }

    #[test]
    fn kl4_vanishes_on_multiples_of_p(p in prop::sample::select(vec![5u64, 7]), t in 0i64..50, a in 1i64..50) {
        prop_assume!(a as u64 % p != 0);
        let m = PrimePowerModulus::new(p, 2).unwrap();
        prop_assert!(kl4_vanishing_check(t * p as i64, a, &m).unwrap().norm() < 1e-9);
    }

    #[test]
    fn correlation_forms_agree(shift in -100i64..100, l1 in 1i64..25, l2 in 1i64..25, a in 1i64..25) {
        prop_assume!(l1 % 5 != 0 && l2 % 5 != 0 && a % 5 != 0);
        let m = PrimePowerModulus::new(5, 2).unwrap();
        let f = c_a_fourier(shift, l1, l2, a, &m).unwrap();
        let r = c_a_reduced(shift, l1, l2, a, &m).unwrap();
        prop_assert!((f - r).norm() < 1e-8);
    }

    #[test]
    fn correlation_vanishing_predicate_is_symmetric(g1 in 1i64..49, g2 in 1i64..49) {
        prop_assume!(g1 % 7 != 0 && g2 % 7 != 0);
        let m = PrimePowerModulus::new(7, 2).unwrap();
        let a = CorrelationParams::new(0, g1, g2, m).unwrap();
        let b = CorrelationParams::new(0, g2, g1, m).unwrap();
        prop_assert_eq!(a.predicts_vanishing(), b.predicts_vanishing());
    }

    #[test]
    fn kloosterman_crt(c1 in 2u64..20, c2 in 2u64..20, mm in -30i64..30, n in -30i64..30) {
        prop_assume!(c1.gcd(&c2) == 1);
        let i1 = inv_mod(c1 % c2, c2).unwrap() as i64;
        let i2 = inv_mod(c2 % c1, c1).unwrap() as i64;
        let whole = kloosterman_s(mm, n, c1 * c2).unwrap();
        let split = kloosterman_s(mm * i2, n * i2, c1).unwrap() * kloosterman_s(mm * i1, n * i1, c2).unwrap();
        prop_assert!((whole - split).norm() < 1e-8);
    }

    #[test]
    fn frak_c1_vanishes_off_diagonal(c1 in 1u64..9, c2 in 1u64..9, m1 in 1i64..9, m2 in 1i64..9) {
        prop_assume!(c1 != c2);
        let Ok(params) = FrakCParams::new(0, (m1, m2), (c1, c2), 1, 7, 2, 3, 1) else {
            return Ok(());
        };
        prop_assert!(frak_c1(&params).unwrap().norm() < 1e-6);
    }

    #[test]
    fn ramanujan_sum_bounded_by_gcd(u in -1000i64..1000, q in 1u64..500) {
        let r = ramanujan_sum(u, q).unwrap();
        prop_assert!(r.unsigned_abs() <= (u.unsigned_abs()).gcd(&q));
    }

    #[test]
    fn tau_is_multiplicative(m in 1usize..140, n in 1usize..140) {
        prop_assume!(m.gcd(&n) == 1);
        let t = tau();
        prop_assert_eq!(t.get(m * n).unwrap(), t.get(m).unwrap() * t.get(n).unwrap());
    }

    #[test]
    fn discrepancy_telescopes(x in 10.0f64..9_000.0, p in prop::sample::select(vec![5u64, 7])) {
        let m = PrimePowerModulus::new(p, 2).unwrap();
        let scan = discrepancy_scan(&m, &[x], &BumpFunction::smooth(), tau(), DEFAULT_DELTA).unwrap();
        prop_assert!(scan.telescoping[0].1.abs() < 1e-10 * x.max(1.0));
    }

    #[test]
    fn twisted_sum_zero_when_p_divides_ell(n in 1.0f64..800.0, t in 1i64..5) {
        let m = PrimePowerModulus::new(5, 2).unwrap();
        let s = twisted_sum(n, 5 * t, &m, &BumpFunction::smooth(), tau()).unwrap();
        prop_assert_eq!(s.value.norm(), 0.0);
    }

    #[test]
    fn poisson_residual_small(c in 1u64..60, beta in -100i64..100, sigma in 0.5f64..50.0) {
        prop_assert!(poisson_check(c, beta, sigma).unwrap().residual < 1e-10);
    }

    #[test]
    fn g17_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn coefficient_file_round_trips(len in 1usize..300) {
        let t = tau_table(len).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        prop_assert_eq!(CoefficientTable::read_from(buf.as_slice()).unwrap(), t);
    }
}
