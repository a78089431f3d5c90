//! Closed-form `Kl_3` modulo prime powers, the `Kl_4 -> Kl_3` reduction and
//! the `Kl_4` vanishing law for arguments divisible by `p`.
//!
//! For `q = p^k`, `p != 3`, `k >= 2` and a unit `a`:
//!
//! ```text
//! Kl_3(a; q) = (p^k / 3) * sum_{r^3 = a mod q} e(3r / q)
//! ```
//!
//! so one evaluation costs a cube-root search mod `p` plus `k` Hensel steps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expsum::{hyper_kloosterman_all, units_and_inverses, PhaseTable, RationalPhase};
use crate::residue::{
    cube_roots, cube_roots_unchecked, jacobi_prime_power_over_3, mul_mod, reduce, PrimePowerModulus,
};
use crate::sum::ComplexSum;

fn check_hypotheses(m: &PrimePowerModulus) -> Result<()> {
    if m.p() == 3 {
        return Err(Error::Unsupported("closed form needs p != 3".into()));
    }
    if m.k() < 2 {
        return Err(Error::Unsupported(
            "closed form needs k >= 2; use brute force for k = 1".into(),
        ));
    }
    Ok(())
}

fn unit_arg(a: i64, m: &PrimePowerModulus) -> Result<u64> {
    let a = reduce(a, m.q());
    if !m.is_unit(a) {
        return Err(Error::Domain(format!("{a} is not a unit mod {m}")));
    }
    Ok(a)
}

#[inline]
fn three_r_phase(r: u64, q: u64) -> Complex64 {
    // 3r reduced as an integer, never as a float product
    RationalPhase::new(((3 * r as u128) % q as u128) as i64, q)
        .expect("q >= 1")
        .value()
}

/// `Kl_3(a; p^k)` from the cube-root formula. Exactly zero when `a` is not
/// a cube.
pub fn kl3_closed(a: i64, m: &PrimePowerModulus) -> Result<Complex64> {
    check_hypotheses(m)?;
    let a = unit_arg(a, m)?;
    Ok(kl3_closed_unchecked(a, m))
}

pub(crate) fn kl3_closed_unchecked(a: u64, m: &PrimePowerModulus) -> Complex64 {
    let roots = cube_roots_unchecked(a, m);
    let sign = jacobi_prime_power_over_3(m) as f64;
    roots
        .iter()
        .map(|&r| three_r_phase(r, m.q()))
        .collect::<ComplexSum>()
        .value()
        * sign
}

/// Number of cube roots of the unit `a` mod `p^k` (0, 1 or 3).
pub fn cube_root_count(a: i64, m: &PrimePowerModulus) -> Result<usize> {
    let a = reduce(a, m.q());
    cube_roots(a, m).map(|r| r.len())
}

/// Closed-form `Kl_3(b; q)` for every residue `b` (zero at non-units).
///
/// Built by running over units `r` and crediting `e(3r/q)` to `b = r^3`,
/// which visits each root of each `b` exactly once.
pub fn kl3_closed_table(m: &PrimePowerModulus) -> Result<Vec<Complex64>> {
    check_hypotheses(m)?;
    let q = m.q();
    if q > 1 << 28 {
        return Err(Error::Resource(format!("Kl_3 table mod {q} is too large")));
    }
    let phases = PhaseTable::new(q)?;
    let mut acc = vec![ComplexSum::new(); q as usize];
    for r in (1..q).filter(|&r| m.is_unit(r)) {
        let b = mul_mod(mul_mod(r, r, q), r, q);
        acc[b as usize].add(phases.at(((3 * r as u128) % q as u128) as u64));
    }
    let sign = jacobi_prime_power_over_3(m) as f64;
    Ok(acc.into_iter().map(|s| s.value() * sign).collect())
}

/// `Kl_4(a; q) = q^{-1/2} sum*_x e(ax/q) Kl_3(x^{-1}; q)` with closed-form
/// `Kl_3`.
pub fn kl4_via_kl3(a: i64, m: &PrimePowerModulus) -> Result<Complex64> {
    check_hypotheses(m)?;
    let a = unit_arg(a, m)?;
    let kl3 = kl3_closed_table(m)?;
    Ok(kl4_from_kl3_table(a, m.q(), &kl3, None))
}

/// Reduction sum for an arbitrary argument `b` against a given `Kl_3` table.
pub(crate) fn kl4_from_kl3_table(
    b: u64,
    q: u64,
    kl3: &[Complex64],
    phases: Option<&PhaseTable>,
) -> Complex64 {
    let owned;
    let phases = match phases {
        Some(t) => t,
        None => {
            owned = PhaseTable::new(q).expect("q validated");
            &owned
        }
    };
    let (units, inv) = units_and_inverses(q);
    let acc: ComplexSum = units
        .iter()
        .map(|&x| phases.at(mul_mod(b, x, q)) * kl3[inv[x as usize] as usize])
        .collect();
    acc.value() / (q as f64).sqrt()
}

/// `Kl_4(b; q)` for every residue `b` via the closed-form reduction, with
/// non-units set to zero (the empty defining sum).
pub fn kl4_table_via_kl3(m: &PrimePowerModulus) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    check_hypotheses(m)?;
    let q = m.q();
    if (q as u128) * (q as u128) > 4_000_000_000 {
        return Err(Error::Resource(format!("Kl_4 table mod {q} needs q^2 work")));
    }
    let kl3 = kl3_closed_table(m)?;
    let phases = PhaseTable::new(q)?;
    Ok((0..q)
        .into_par_iter()
        .map(|b| {
            if m.is_unit(b) {
                kl4_from_kl3_table(b, q, &kl3, Some(&phases))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect())
}

/// Evaluates `Kl_4(a m; q)` for `p | m` through the reduction
/// `q^{-1/2} sum*_x e(amx/q) Kl_3(x^{-1}; q)` with brute-force `Kl_3`.
///
/// The defining sum over unit quadruples is empty for such arguments, so
/// this is the route on which the vanishing is a genuine cancellation. The
/// residual is returned rather than asserted.
pub fn kl4_vanishing_check(shift: i64, a: i64, m: &PrimePowerModulus) -> Result<Complex64> {
    if m.k() < 2 {
        return Err(Error::Unsupported("vanishing law needs k >= 2".into()));
    }
    if reduce(shift, m.p()) != 0 {
        return Err(Error::Domain(format!("p = {} must divide m = {shift}", m.p())));
    }
    let a = unit_arg(a, m)?;
    let q = m.q();
    let b = mul_mod(a, reduce(shift, q), q);
    let kl3 = hyper_kloosterman_all(3, q)?;
    Ok(kl4_from_kl3_table(b, q, &kl3, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::{e_frac, hyper_kloosterman_all, hyper_kloosterman_brute};
    use crate::residue::UnitResidue;

    fn m(p: u64, k: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, k).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn kl3_examples() {
        let v = kl3_closed(1, &m(5, 2)).unwrap();
        assert!(close(v, e_frac(3, 25).unwrap(), 1e-15));
        let brute = hyper_kloosterman_brute(3, &UnitResidue::new(1, 25).unwrap(), 25).unwrap();
        assert!(close(v, brute, 1e-9));

        assert_eq!(kl3_closed(3, &m(7, 2)).unwrap(), Complex64::new(0.0, 0.0));
        let brute = hyper_kloosterman_brute(3, &UnitResidue::new(3, 49).unwrap(), 49).unwrap();
        assert!(brute.norm() < 1e-9);

        let v = kl3_closed(1, &m(7, 2)).unwrap();
        let expected = e_frac(3, 49).unwrap() + e_frac(54, 49).unwrap() + e_frac(90, 49).unwrap();
        assert!(close(v, expected, 1e-14));
        let brute = hyper_kloosterman_brute(3, &UnitResidue::new(1, 49).unwrap(), 49).unwrap();
        assert!(close(v, brute, 1e-9));
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(matches!(kl3_closed(1, &m(3, 3)), Err(Error::Unsupported(_))));
        assert!(matches!(kl3_closed(1, &m(5, 1)), Err(Error::Unsupported(_))));
        assert!(matches!(kl3_closed(5, &m(5, 2)), Err(Error::Domain(_))));
        assert!(matches!(kl4_via_kl3(10, &m(5, 2)), Err(Error::Domain(_))));
        assert!(matches!(kl4_vanishing_check(3, 1, &m(5, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn table_matches_pointwise_closed_form() {
        for (p, k) in [(5, 2), (7, 2), (7, 3), (11, 2), (2, 5)] {
            let md = m(p, k);
            let table = kl3_closed_table(&md).unwrap();
            for a in (1..md.q()).filter(|&a| md.is_unit(a)) {
                assert!(close(table[a as usize], kl3_closed(a as i64, &md).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn closed_form_zero_iff_no_cube_root() {
        for (p, k) in [(7, 2), (13, 2), (5, 3)] {
            let md = m(p, k);
            for a in (1..md.q() as i64).filter(|&a| a as u64 % p != 0) {
                let v = kl3_closed(a, &md).unwrap();
                assert_eq!(v == Complex64::new(0.0, 0.0), cube_root_count(a, &md).unwrap() == 0);
                assert!(v.norm() <= 3.0 + 1e-12);
            }
        }
    }

    #[test]
    fn cube_root_count_examples() {
        assert_eq!(cube_root_count(2, &m(5, 2)).unwrap(), 1);
        assert_eq!(cube_root_count(1, &m(7, 2)).unwrap(), 3);
        assert_eq!(cube_root_count(3, &m(7, 2)).unwrap(), 0);
    }

    #[test]
    fn kl4_reduction_examples() {
        for (a, p) in [(1i64, 5u64), (2, 7)] {
            let md = m(p, 2);
            let via = kl4_via_kl3(a, &md).unwrap();
            let brute =
                hyper_kloosterman_brute(4, &UnitResidue::new(a, md.q()).unwrap(), md.q()).unwrap();
            assert!(close(via, brute, 1e-8), "{via} vs {brute}");
        }
    }

    #[test]
    fn kl4_reduction_all_units_mod_25_and_49() {
        for p in [5u64, 7] {
            let md = m(p, 2);
            let brute = hyper_kloosterman_all(4, md.q()).unwrap();
            let via = kl4_table_via_kl3(&md).unwrap();
            for a in 0..md.q() as usize {
                assert!(close(via[a], brute[a], 1e-8), "a={a} mod {}", md.q());
            }
        }
    }

    #[test]
    fn kl4_vanishing_examples() {
        assert!(kl4_vanishing_check(5, 1, &m(5, 2)).unwrap().norm() < 1e-9);
        assert!(kl4_vanishing_check(49, 3, &m(7, 2)).unwrap().norm() < 1e-9);
        assert!(kl4_vanishing_check(10, 3, &m(5, 3)).unwrap().norm() < 1e-9);
        // the law is stated for every prime
        assert!(kl4_vanishing_check(3, 2, &m(3, 3)).unwrap().norm() < 1e-9);
    }
}
