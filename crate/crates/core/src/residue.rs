//! Exact arithmetic in `Z/p^k Z`: inverses, Jacobi symbols, valuations,
//! cube roots by Hensel lifting, and Dirichlet characters on the cyclic unit
//! group for odd `p`.
//!
//! All moduli fit in a `u64`; products go through `u128`.

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::expsum::e_frac;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, or `None` when `gcd(a, m) > 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = ((a % m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller–Rabin; the base set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Möbius function by trial factorization.
pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1, "mobius is defined for n >= 1");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `q = p^k` with `p` prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePowerModulus {
    p: u64,
    k: u32,
    q: u64,
}

impl PrimePowerModulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::Domain("exponent k must be >= 1".into()));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= 1 << 63)
            .ok_or_else(|| Error::Resource(format!("{p}^{k} exceeds 2^63")))?;
        Ok(Self { p, k, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `p^j`.
    pub fn p_pow(&self, j: u32) -> u64 {
        self.p.pow(j)
    }

    /// `phi(q) = p^(k-1) (p-1)`.
    pub fn phi(&self) -> u64 {
        self.q / self.p * (self.p - 1)
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }
}

impl fmt::Display for PrimePowerModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.k)
    }
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        Ok(Self {
            value: reduce(value, modulus),
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// A residue class coprime to its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitResidue {
    value: u64,
    modulus: u64,
}

impl UnitResidue {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        let r = Residue::new(value, modulus)?;
        let g = r.value.gcd(&modulus);
        if g != 1 {
            return Err(Error::Domain(format!(
                "{value} is not a unit mod {modulus} (gcd = {g})"
            )));
        }
        Ok(Self {
            value: r.value,
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl From<UnitResidue> for Residue {
    fn from(u: UnitResidue) -> Self {
        Residue {
            value: u.value,
            modulus: u.modulus,
        }
    }
}

impl TryFrom<Residue> for UnitResidue {
    type Error = Error;

    fn try_from(r: Residue) -> Result<Self> {
        UnitResidue::new(r.value as i64, r.modulus)
    }
}

pub fn mod_inv(a: UnitResidue) -> UnitResidue {
    // gcd(a, m) = 1 is a type invariant.
    let inv = inv_mod(a.value, a.modulus).expect("unit residue has an inverse");
    UnitResidue {
        value: inv,
        modulus: a.modulus,
    }
}

/// Checked inverse for raw values; names the gcd on failure.
pub fn try_inv(a: i64, m: u64) -> Result<u64> {
    UnitResidue::new(a, m).map(|u| mod_inv(u).value)
}

/// Jacobi symbol `(n / m)` for odd positive `m`.
pub fn jacobi(n: i64, m: u64) -> Result<i8> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::Domain(format!(
            "Jacobi symbol needs an odd positive modulus, got {m}"
        )));
    }
    let mut a = reduce(n, m);
    let mut m = m;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            sign = -sign;
        }
        a %= m;
    }
    Ok(if m == 1 { sign } else { 0 })
}

/// `(p^k / 3)`, evaluated as `((p mod 3) / 3)^k`.
pub fn jacobi_prime_power_over_3(m: &PrimePowerModulus) -> i8 {
    match m.p() % 3 {
        0 => 0,
        1 => 1,
        _ => {
            if m.k() % 2 == 0 {
                1
            } else {
                -1
            }
        }
    }
}

/// p-adic valuation; `Infinite` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    /// `min(self, cap)` as an integer.
    pub fn min_with(self, cap: u32) -> u32 {
        match self {
            Valuation::Finite(v) => v.min(cap),
            Valuation::Infinite => cap,
        }
    }
}

pub fn valuation(n: i64, p: u64) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    let mut n = n.unsigned_abs();
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Valuation::Finite(e)
}

/// All `r mod p^k` with `r^3 = a`, ascending.
///
/// Roots mod `p` are found by enumeration and lifted one power of `p` at a
/// time with Newton's step; `3 r^2` is a unit because `p != 3`.
pub fn cube_roots(a: u64, m: &PrimePowerModulus) -> Result<Vec<u64>> {
    let p = m.p();
    if p == 3 {
        return Err(Error::Unsupported("cube roots need p != 3".into()));
    }
    let a = a % m.q();
    if a % p == 0 {
        return Err(Error::Domain(format!("{a} is not a unit mod {m}")));
    }
    Ok(cube_roots_unchecked(a, m))
}

pub(crate) fn cube_roots_unchecked(a: u64, m: &PrimePowerModulus) -> Vec<u64> {
    let p = m.p();
    let a_p = a % p;
    let mut roots: Vec<u64> = if p % 3 == 2 {
        // cubing is a bijection on (Z/p)^*; r = a^((2p-1)/3)
        vec![pow_mod(a_p, (2 * p - 1) / 3, p)]
    } else {
        (1..p).filter(|&r| pow_mod(r, 3, p) == a_p).collect()
    };
    let mut modulus = p;
    for _ in 1..m.k() {
        modulus *= p;
        let a_j = a % modulus;
        for r in roots.iter_mut() {
            let f = (pow_mod(*r, 3, modulus) + modulus - a_j) % modulus;
            let df = mul_mod(3, mul_mod(*r, *r, modulus), modulus);
            let step = mul_mod(f, inv_mod(df, modulus).expect("3r^2 is a unit"), modulus);
            *r = (*r + modulus - step) % modulus;
        }
    }
    roots.sort_unstable();
    roots
}

/// Smallest generator of the cyclic group `(Z/p^k)^*` for odd `p`.
pub fn unit_group_generator(m: &PrimePowerModulus) -> Result<UnitResidue> {
    if m.p() == 2 {
        return Err(Error::Unsupported(
            "(Z/2^k)^* is not cyclic for k >= 3; p = 2 is not supported".into(),
        ));
    }
    let phi = m.phi();
    let prime_factors: Vec<u64> = factorize(phi).into_iter().map(|(r, _)| r).collect();
    (2..m.q())
        .filter(|&g| m.is_unit(g))
        .find(|&g| prime_factors.iter().all(|&r| pow_mod(g, phi / r, m.q()) != 1))
        .map(|g| UnitResidue {
            value: g,
            modulus: m.q(),
        })
        .ok_or_else(|| Error::Domain(format!("no generator found mod {m}")))
}

/// Dirichlet character mod `p^k` (odd `p`) given by `chi(g^t) = e(j t / phi(q))`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: PrimePowerModulus,
    generator: UnitResidue,
    index: u64,
    /// Discrete logarithm to base `generator`; `u64::MAX` marks non-units.
    dlog: Vec<u64>,
}

impl DirichletCharacter {
    pub fn new(modulus: PrimePowerModulus, index: u64) -> Result<Self> {
        let generator = unit_group_generator(&modulus)?;
        let q = modulus.q();
        if q > 1 << 26 {
            return Err(Error::Resource(format!(
                "character table mod {q} is too large"
            )));
        }
        let mut dlog = vec![u64::MAX; q as usize];
        let mut x = 1u64;
        for t in 0..modulus.phi() {
            dlog[x as usize] = t;
            x = mul_mod(x, generator.value(), q);
        }
        Ok(Self {
            modulus,
            generator,
            index: index % modulus.phi(),
            dlog,
        })
    }

    pub fn modulus(&self) -> &PrimePowerModulus {
        &self.modulus
    }

    pub fn generator(&self) -> UnitResidue {
        self.generator
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// The quadratic character `(. / p)` when `k = 1`.
    pub fn legendre(p: u64) -> Result<Self> {
        let m = PrimePowerModulus::new(p, 1)?;
        Self::new(m, m.phi() / 2)
    }

    pub fn is_primitive(&self) -> bool {
        if self.modulus.k() == 1 {
            self.index != 0
        } else {
            self.index % self.modulus.p() != 0
        }
    }

    /// Value at `x`; zero on non-units.
    pub fn eval(&self, x: i64) -> Complex64 {
        let x = reduce(x, self.modulus.q());
        match self.dlog[x as usize] {
            u64::MAX => Complex64::new(0.0, 0.0),
            t => {
                let phi = self.modulus.phi();
                e_frac(mul_mod(self.index, t, phi) as i64, phi).expect("phi >= 1")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_cube_roots(a: u64, q: u64) -> Vec<u64> {
        (0..q).filter(|&r| pow_mod(r, 3, q) == a % q).collect()
    }

    #[test]
    fn mod_inv_examples() {
        assert_eq!(mod_inv(UnitResidue::new(1, 25).unwrap()).value(), 1);
        assert_eq!(mod_inv(UnitResidue::new(2, 25).unwrap()).value(), 13);
        assert_eq!(mod_inv(UnitResidue::new(3, 49).unwrap()).value(), 33);
    }

    #[test]
    fn non_unit_is_rejected_with_gcd() {
        let err = UnitResidue::new(10, 25).unwrap_err();
        assert!(matches!(&err, Error::Domain(msg) if msg.contains("gcd = 5")));
        assert!(try_inv(14, 49).is_err());
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(1, 3).unwrap(), 1);
        assert_eq!(jacobi(25, 3).unwrap(), 1);
        assert_eq!(jacobi(5, 3).unwrap(), -1);
        assert_eq!(jacobi(3, 9).unwrap(), 0);
        assert!(jacobi(3, 8).is_err());
    }

    #[test]
    fn jacobi_matches_euler_criterion_for_primes() {
        for p in [3u64, 5, 7, 11, 13, 101] {
            for n in 0..p {
                let euler = pow_mod(n, (p - 1) / 2, p);
                let expected = match euler {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                assert_eq!(jacobi(n as i64, p).unwrap(), expected, "({n}/{p})");
            }
        }
    }

    #[test]
    fn prime_power_over_3_agrees_with_jacobi() {
        for p in [2u64, 5, 7, 11, 13] {
            for k in 1..6 {
                let m = PrimePowerModulus::new(p, k).unwrap();
                assert_eq!(
                    jacobi_prime_power_over_3(&m),
                    jacobi(m.q() as i64, 3).unwrap()
                );
            }
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(50, 5), Valuation::Finite(2));
        assert_eq!(valuation(7, 5), Valuation::Finite(0));
        assert_eq!(valuation(0, 5), Valuation::Infinite);
        assert_eq!(valuation(-125, 5), Valuation::Finite(3));
    }

    #[test]
    fn cube_root_examples() {
        let m = |p, k| PrimePowerModulus::new(p, k).unwrap();
        assert_eq!(cube_roots(1, &m(5, 2)).unwrap(), vec![1]);
        assert_eq!(cube_roots(1, &m(7, 2)).unwrap(), vec![1, 18, 30]);
        assert_eq!(cube_roots(3, &m(7, 2)).unwrap(), Vec::<u64>::new());
        assert_eq!(brute_cube_roots(1, 49), vec![1, 18, 30]);
        assert!(brute_cube_roots(3, 49).is_empty());
    }

    #[test]
    fn cube_roots_errors() {
        let m3 = PrimePowerModulus::new(3, 2).unwrap();
        assert!(matches!(cube_roots(1, &m3), Err(Error::Unsupported(_))));
        let m5 = PrimePowerModulus::new(5, 2).unwrap();
        assert!(matches!(cube_roots(10, &m5), Err(Error::Domain(_))));
    }

    #[test]
    fn cube_roots_exhaustive_against_brute_force_and_count_law() {
        for p in [5u64, 7, 11, 13] {
            for k in 1..=3 {
                let m = PrimePowerModulus::new(p, k).unwrap();
                for a in (1..m.q()).filter(|a| a % p != 0) {
                    let roots = cube_roots(a, &m).unwrap();
                    assert_eq!(roots, brute_cube_roots(a, m.q()), "a={a} mod {m}");
                    let expected = if p % 3 == 2 {
                        1
                    } else if pow_mod(a % p, (p - 1) / 3, p) == 1 {
                        3
                    } else {
                        0
                    };
                    assert_eq!(roots.len(), expected);
                }
            }
        }
    }

    #[test]
    fn generator_examples() {
        let g = |p, k| {
            unit_group_generator(&PrimePowerModulus::new(p, k).unwrap())
                .unwrap()
                .value()
        };
        assert_eq!(g(5, 2), 2);
        assert_eq!(g(7, 2), 3);
        assert_eq!(g(5, 1), 2);
        // order of 2 mod 25 is exactly 20
        let order = (1..=20).find(|&t| pow_mod(2, t, 25) == 1).unwrap();
        assert_eq!(order, 20);
        assert!(unit_group_generator(&PrimePowerModulus::new(2, 3).unwrap()).is_err());
    }

    #[test]
    fn characters_are_multiplicative() {
        for (p, k) in [(5u64, 2u32), (7, 2)] {
            let m = PrimePowerModulus::new(p, k).unwrap();
            for j in [1u64, 3, 5, 7] {
                let chi = DirichletCharacter::new(m, j).unwrap();
                for a in 0..m.q() as i64 {
                    for b in 0..m.q() as i64 {
                        let lhs = chi.eval(a * b);
                        let rhs = chi.eval(a) * chi.eval(b);
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn primitivity_flag() {
        let m25 = PrimePowerModulus::new(5, 2).unwrap();
        assert!(DirichletCharacter::new(m25, 3).unwrap().is_primitive());
        assert!(!DirichletCharacter::new(m25, 5).unwrap().is_primitive());
        assert!(!DirichletCharacter::new(m25, 0).unwrap().is_primitive());
        assert!(DirichletCharacter::legendre(5).unwrap().is_primitive());
    }

    #[test]
    fn primality_and_factorization() {
        assert!(is_prime(10007));
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751));
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(euler_phi(25), 20);
        assert_eq!((mobius(1), mobius(4), mobius(6)), (1, 0, 1));
        assert!(PrimePowerModulus::new(9, 2).is_err());
    }

    proptest! {
        #[test]
        fn inverse_is_an_involution(a in 1i64..100_000, p in prop::sample::select(vec![5u64, 7, 11, 13, 101])) {
            prop_assume!(a as u64 % p != 0);
            let u = UnitResidue::new(a, p * p).unwrap();
            prop_assert_eq!(mod_inv(mod_inv(u)), u);
            prop_assert_eq!(mul_mod(u.value(), mod_inv(u).value(), p * p), 1);
        }

        #[test]
        fn jacobi_is_multiplicative(a in -500i64..500, b in -500i64..500, m in (0u64..200).prop_map(|x| 2 * x + 1)) {
            let lhs = jacobi(a * b, m).unwrap();
            prop_assert_eq!(lhs, jacobi(a, m).unwrap() * jacobi(b, m).unwrap());
        }

        #[test]
        fn jacobi_multiplicative_in_modulus(a in -500i64..500, m in (0u64..60).prop_map(|x| 2 * x + 1), n in (0u64..60).prop_map(|x| 2 * x + 1)) {
            prop_assert_eq!(jacobi(a, m * n).unwrap(), jacobi(a, m).unwrap() * jacobi(a, n).unwrap());
        }
    }
}
