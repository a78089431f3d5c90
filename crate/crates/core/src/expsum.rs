//! Reference evaluators for the exponential sums: additive characters,
//! hyper-Kloosterman sums, classical Kloosterman sums, Ramanujan sums and
//! normalized Gauss sums.
//!
//! Phases are always reduced as integers before the single trigonometric
//! evaluation, and sums are accumulated with [`ComplexSum`] in ascending
//! order of the summation variables.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::residue::{euler_phi, inv_mod, mobius, mul_mod, reduce, DirichletCharacter, UnitResidue};
use crate::sum::ComplexSum;

/// Default cap on primitive operations for a single brute-force evaluation.
pub const DEFAULT_COST_BUDGET: u64 = 100_000_000;

/// `e(numerator / denominator)` with the numerator stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalPhase {
    numerator: u64,
    denominator: u64,
}

impl RationalPhase {
    pub fn new(numerator: i64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Domain("e(a/q) needs q >= 1".into()));
        }
        Ok(Self {
            numerator: reduce(numerator, denominator),
            denominator,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// Evaluates the phase. Quarter turns are split off exactly so that
    /// `e(0)`, `e(1/4)`, `e(1/2)`, `e(3/4)` come out exact.
    pub fn value(&self) -> Complex64 {
        let four_r = 4 * self.numerator as u128;
        let q = self.denominator as u128;
        let quadrant = (four_r / q) as u8;
        let rem = (four_r % q) as f64 / q as f64;
        let (s, c) = (FRAC_PI_2 * rem).sin_cos();
        match quadrant {
            0 => Complex64::new(c, s),
            1 => Complex64::new(-s, c),
            2 => Complex64::new(-c, -s),
            _ => Complex64::new(s, -c),
        }
    }
}

/// `e(a / q) = exp(2 pi i a / q)`.
pub fn e_frac(a: i64, q: u64) -> Result<Complex64> {
    RationalPhase::new(a, q).map(|ph| ph.value())
}

/// Precomputed `e(j / q)` for `0 <= j < q`.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    q: u64,
    table: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("phase table needs q >= 1".into()));
        }
        if q > 1 << 28 {
            return Err(Error::Resource(format!("phase table mod {q} is too large")));
        }
        let table = (0..q)
            .map(|j| RationalPhase { numerator: j, denominator: q }.value())
            .collect();
        Ok(Self { q, table })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `e(j / q)` for `j` already reduced mod `q`.
    #[inline]
    pub fn at(&self, j: u64) -> Complex64 {
        self.table[j as usize]
    }

    #[inline]
    pub fn at_signed(&self, j: i64) -> Complex64 {
        self.table[reduce(j, self.q) as usize]
    }
}

/// Units mod `q` in ascending order together with a full inverse table
/// (`0` marks non-units).
pub(crate) fn units_and_inverses(q: u64) -> (Vec<u64>, Vec<u64>) {
    let mut inv = vec![0u64; q as usize];
    let mut units = Vec::new();
    for x in 0..q {
        if x.gcd(&q) == 1 {
            units.push(x);
            inv[x as usize] = inv_mod(x, q).expect("unit");
        }
    }
    (units, inv)
}

fn check_budget(cost: u128, budget: u64, what: &str) -> Result<()> {
    if cost > budget as u128 {
        return Err(Error::Resource(format!(
            "{what} needs ~{cost} operations (budget {budget}); use the closed form instead"
        )));
    }
    Ok(())
}

fn normalization(d: u32, q: u64) -> f64 {
    (q as f64).powf(-(d as f64 - 1.0) / 2.0)
}

/// Normalized hyper-Kloosterman sum `Kl_d(a; q)` by direct enumeration.
///
/// The first `d - 1` variables run over units in lexicographic order and the
/// last is fixed by `x_d = a (x_1 ... x_{d-1})^{-1}`. Requires
/// `q^(d-1) <= 10^8`.
pub fn hyper_kloosterman_brute(d: u32, a: &UnitResidue, q: u64) -> Result<Complex64> {
    hyper_kloosterman_brute_with_budget(d, a, q, DEFAULT_COST_BUDGET)
}

pub fn hyper_kloosterman_brute_with_budget(
    d: u32,
    a: &UnitResidue,
    q: u64,
    budget: u64,
) -> Result<Complex64> {
    if d == 0 {
        return Err(Error::Domain("hyper-Kloosterman sums need d >= 1".into()));
    }
    if a.modulus() != q {
        return Err(Error::Domain(format!(
            "argument is a residue mod {}, expected mod {q}",
            a.modulus()
        )));
    }
    check_budget((q as u128).pow(d - 1), budget, "brute-force Kl_d")?;
    Ok(kl_brute_raw(d, a.value(), q))
}

/// Defining sum for any argument `b`; tuples are restricted to units, so a
/// non-unit `b` yields the empty sum.
pub(crate) fn kl_brute_raw(d: u32, b: u64, q: u64) -> Complex64 {
    let b = b % q;
    if b.gcd(&q) != 1 {
        return Complex64::new(0.0, 0.0);
    }
    let phases = PhaseTable::new(q).expect("q checked by caller");
    let (units, inv) = units_and_inverses(q);
    let free = (d - 1) as usize;
    let mut acc = ComplexSum::new();
    if free == 0 {
        acc.add(phases.at(b));
        return acc.value() * normalization(d, q);
    }
    // odometer over the free variables; prefix products and sums per depth
    let mut idx = vec![0usize; free];
    let mut prod = vec![1u64; free + 1];
    let mut sum = vec![0u64; free + 1];
    for level in 0..free {
        let x = units[0];
        prod[level + 1] = mul_mod(prod[level], x, q);
        sum[level + 1] = (sum[level] + x) % q;
    }
    loop {
        let last = mul_mod(b, inv[prod[free] as usize], q);
        acc.add(phases.at((sum[free] + last) % q));
        // advance
        let mut level = free;
        loop {
            if level == 0 {
                return acc.value() * normalization(d, q);
            }
            level -= 1;
            idx[level] += 1;
            if idx[level] < units.len() {
                break;
            }
            idx[level] = 0;
        }
        for l in level..free {
            let x = units[idx[l]];
            prod[l + 1] = mul_mod(prod[l], x, q);
            sum[l + 1] = (sum[l] + x) % q;
        }
    }
}

/// `Kl_d(b; q)` for every residue `b mod q` at once (zero at non-units).
///
/// Same defining sum, reorganized as the recursion
/// `Kl_{j+1}(a) ~ sum_x e(x/q) Kl_j(a x^{-1})`, costing `(d-1) phi(q)^2`
/// instead of `phi(q)^(d-1)` per argument.
pub fn hyper_kloosterman_all(d: u32, q: u64) -> Result<Vec<Complex64>> {
    hyper_kloosterman_all_with_budget(d, q, 4_000_000_000)
}

pub fn hyper_kloosterman_all_with_budget(d: u32, q: u64, budget: u64) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::Domain("hyper-Kloosterman sums need d >= 1".into()));
    }
    let phi = euler_phi(q) as u128;
    check_budget((d as u128 - 1) * phi * phi, budget, "Kl_d table")?;
    let phases = PhaseTable::new(q)?;
    let (units, inv) = units_and_inverses(q);
    let mut current: Vec<Complex64> = (0..q)
        .map(|b| {
            if inv[b as usize] != 0 || q == 1 {
                phases.at(b)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    for _ in 1..d {
        let next: Vec<Complex64> = (0..q)
            .into_par_iter()
            .map(|a| {
                if inv[a as usize] == 0 && q != 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut acc = ComplexSum::new();
                for &x in &units {
                    let y = mul_mod(a, inv[x as usize], q);
                    acc.add(phases.at(x) * current[y as usize]);
                }
                acc.value()
            })
            .collect();
        current = next;
    }
    let norm = normalization(d, q);
    Ok(current.into_iter().map(|z| z * norm).collect())
}

/// Classical (unnormalized) Kloosterman sum `S(m, n; c)`.
pub fn kloosterman_s(m: i64, n: i64, c: u64) -> Result<Complex64> {
    if c == 0 {
        return Err(Error::Domain("Kloosterman modulus must be >= 1".into()));
    }
    let m = reduce(m, c);
    let n = reduce(n, c);
    let mut acc = ComplexSum::new();
    for x in 0..c {
        if let Some(xi) = inv_mod(x, c) {
            let phase = (mul_mod(m, x, c) + mul_mod(n, xi, c)) % c;
            acc.add(RationalPhase { numerator: phase, denominator: c }.value());
        }
    }
    Ok(acc.value())
}

/// Ramanujan sum `R_q(u)` from `mu(q/g) phi(q) / phi(q/g)`, `g = gcd(u, q)`.
pub fn ramanujan_sum(u: i64, q: u64) -> Result<i64> {
    if q == 0 {
        return Err(Error::Domain("Ramanujan sum modulus must be >= 1".into()));
    }
    let g = reduce(u, q).gcd(&q);
    let r = q / g;
    Ok(mobius(r) as i64 * (euler_phi(q) / euler_phi(r)) as i64)
}

/// Brute-force `sum_{d unit mod q} e(du/q)`.
pub fn ramanujan_sum_brute(u: i64, q: u64) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::Domain("Ramanujan sum modulus must be >= 1".into()));
    }
    let u = reduce(u, q);
    Ok((0..q)
        .filter(|d| d.gcd(&q) == 1)
        .map(|d| RationalPhase { numerator: mul_mod(d, u, q), denominator: q }.value())
        .collect::<ComplexSum>()
        .value())
}

/// Closed form cross-checked against brute force; errors on disagreement.
pub fn ramanujan_sum_verified(u: i64, q: u64) -> Result<i64> {
    let closed = ramanujan_sum(u, q)?;
    let brute = ramanujan_sum_brute(u, q)?;
    if (brute - Complex64::new(closed as f64, 0.0)).norm() > 1e-9 {
        return Err(Error::Domain(format!(
            "R_{q}({u}): closed form {closed} disagrees with brute force {brute}"
        )));
    }
    Ok(brute.re.round() as i64)
}

/// Normalized Gauss sum `q^{-1/2} sum_x chi(x) e(x/q)`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus().q();
    let acc: ComplexSum = (0..q as i64)
        .map(|x| chi.eval(x) * RationalPhase { numerator: x as u64, denominator: q }.value())
        .collect();
    acc.value() / (q as f64).sqrt()
}

/// `sum_{a mod q} e(ab/q)`, which is `q` when `q | b` and `0` otherwise.
pub fn additive_orthogonality(b: i64, q: u64) -> Result<Complex64> {
    let table = PhaseTable::new(q)?;
    let b = reduce(b, q);
    Ok((0..q)
        .map(|a| table.at(mul_mod(a, b, q)))
        .collect::<ComplexSum>()
        .value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::PrimePowerModulus;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn e_frac_examples() {
        assert_eq!(e_frac(0, 7).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(e_frac(1, 2).unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(e_frac(1, 4).unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(e_frac(-1, 4).unwrap(), Complex64::new(0.0, -1.0));
        assert!(e_frac(1, 0).is_err());
    }

    #[test]
    fn e_frac_unit_modulus_and_agreement_with_libm() {
        for q in [3u64, 7, 25, 49, 1000, 10007] {
            for a in [-5i64, 1, 2, 3, 11, 999] {
                let z = e_frac(a, q).unwrap();
                assert!((z.norm() - 1.0).abs() <= f64::EPSILON);
                let theta = 2.0 * PI * a.rem_euclid(q as i64) as f64 / q as f64;
                assert!(close(z, Complex64::new(theta.cos(), theta.sin()), 1e-14));
            }
        }
    }

    #[test]
    fn additive_orthogonality_holds() {
        for q in [1u64, 5, 12, 25] {
            for b in -30i64..30 {
                let expected = if b.rem_euclid(q as i64) == 0 { q as f64 } else { 0.0 };
                assert!(close(additive_orthogonality(b, q).unwrap(), Complex64::new(expected, 0.0), 1e-12));
            }
        }
    }

    #[test]
    fn hyper_kloosterman_examples() {
        let a = UnitResidue::new(3, 7).unwrap();
        assert!(close(hyper_kloosterman_brute(1, &a, 7).unwrap(), e_frac(3, 7).unwrap(), 1e-15));

        // x + 1/x over units mod 5: {2, 0, 0, 3} -> 2 + e(2/5) + e(3/5)
        let one = UnitResidue::new(1, 5).unwrap();
        let expected = (2.0 + 2.0 * (4.0 * PI / 5.0).cos()) / 5f64.sqrt();
        let got = hyper_kloosterman_brute(2, &one, 5).unwrap();
        assert!(close(got, Complex64::new(expected, 0.0), 1e-12));
        assert!((got.re - 0.17082).abs() < 1e-5);
    }

    #[test]
    fn cost_guard_rejects_large_requests() {
        let a = UnitResidue::new(1, 10201).unwrap();
        let err = hyper_kloosterman_brute(3, &a, 10201).unwrap_err();
        assert!(matches!(err, Error::Resource(ref m) if m.contains("closed form")));
        let bad = UnitResidue::new(1, 7).unwrap();
        assert!(hyper_kloosterman_brute(2, &bad, 5).is_err());
    }

    #[test]
    fn table_matches_direct_enumeration() {
        for (d, q) in [(2u32, 25u64), (3, 25), (3, 49), (4, 25), (3, 27), (2, 15)] {
            let table = hyper_kloosterman_all(d, q).unwrap();
            for b in 0..q {
                let direct = kl_brute_raw(d, b, q);
                assert!(close(table[b as usize], direct, 1e-10), "d={d} q={q} b={b}");
            }
        }
    }

    #[test]
    fn kl2_is_normalized_kloosterman() {
        for q in [5u64, 25, 49, 121] {
            let kl2 = hyper_kloosterman_all(2, q).unwrap();
            for a in (1..q).filter(|a| a.gcd(&q) == 1) {
                let s = kloosterman_s(1, a as i64, q).unwrap() / (q as f64).sqrt();
                assert!(close(kl2[a as usize], s, 1e-10));
            }
        }
    }

    #[test]
    fn deligne_bound_and_conjugation_symmetry() {
        for p in [5u64, 7, 11, 13] {
            for k in 1..=3 {
                let q = p.pow(k);
                for d in 2..=4u32 {
                    let table = hyper_kloosterman_all(d, q).unwrap();
                    for a in (1..q).filter(|a| a % p != 0) {
                        let v = table[a as usize];
                        assert!(v.norm() <= d as f64 + 1e-9, "Kl_{d}({a};{q}) = {v}");
                        let flipped = if d % 2 == 0 { a } else { q - a };
                        assert!(close(v.conj(), table[flipped as usize], 1e-9));
                    }
                }
            }
        }
    }

    #[test]
    fn kloosterman_examples() {
        for c in [1u64, 2, 7, 25, 36] {
            let s = kloosterman_s(0, 0, c).unwrap();
            assert!(close(s, Complex64::new(euler_phi(c) as f64, 0.0), 1e-12));
        }
        let s = kloosterman_s(1, 1, 5).unwrap();
        assert!(close(s, Complex64::new(2.0 + 2.0 * (4.0 * PI / 5.0).cos(), 0.0), 1e-12));
        assert!((s.re - 0.38197).abs() < 1e-5);
    }

    #[test]
    fn kloosterman_crt_splitting() {
        // S(a, b; c1 c2) = S(a c2^-1, b c2^-1; c1) S(a c1^-1, b c1^-1; c2)
        let split = |a: i64, b: i64, c1: u64, c2: u64| {
            let i2 = inv_mod(c2 % c1, c1).unwrap() as i64;
            let i1 = inv_mod(c1 % c2, c2).unwrap() as i64;
            kloosterman_s(a * i2, b * i2, c1).unwrap() * kloosterman_s(a * i1, b * i1, c2).unwrap()
        };
        let whole = kloosterman_s(1, 1, 15).unwrap();
        assert!(close(whole, split(1, 1, 3, 5), 1e-12));
        assert!(close(whole, split(1, 1, 5, 3), 1e-12));
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan_sum(25, 25).unwrap(), 20);
        assert_eq!(ramanujan_sum(1, 5).unwrap(), -1);
        assert_eq!(ramanujan_sum(5, 25).unwrap(), -5);
        assert_eq!(ramanujan_sum_verified(5, 25).unwrap(), -5);
        for q in 1..60u64 {
            for u in -20..20 {
                ramanujan_sum_verified(u, q).unwrap();
                assert!(ramanujan_sum(u, q).unwrap().unsigned_abs() <= reduce(u, q).gcd(&q));
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let leg = DirichletCharacter::legendre(5).unwrap();
        assert!(close(gauss_sum(&leg), Complex64::new(1.0, 0.0), 1e-12));

        let m25 = PrimePowerModulus::new(5, 2).unwrap();
        for j in (1..20).filter(|j| j % 5 != 0) {
            let chi = DirichletCharacter::new(m25, j).unwrap();
            assert!(chi.is_primitive());
            assert!((gauss_sum(&chi).norm() - 1.0).abs() < 1e-10);
        }
        // induced from mod 5: the sum over x mod 25 collapses
        for j in [5u64, 10, 15] {
            let chi = DirichletCharacter::new(m25, j).unwrap();
            assert!(!chi.is_primitive());
            assert!(gauss_sum(&chi).norm() < 1e-10);
        }
    }
}
