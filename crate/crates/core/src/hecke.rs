//! Hecke coefficients of a level-one eigenform (by default the discriminant
//! `Delta`), its symmetric square and the isobaric sum `1 + sym^2 f`.
//!
//! Integer coefficients are exact `i128`; every normalized quantity is an
//! exact `BigRational`. Only squares `lambda_f(n)^2` and values at square
//! arguments are ever materialized, so no radicals appear.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::residue::factorize;
pub use crate::residue::mobius;

/// Largest table length accepted by [`tau_table`].
pub const MAX_TABLE_LEN: usize = 1_000_000;

/// Weight of `Delta`.
pub const DELTA_WEIGHT: u32 = 12;

/// File name of the persisted `tau` table inside the cache directory.
pub const TAU_CACHE_FILE: &str = "tau.cache";

// Two primes whose product exceeds twice Deligne's bound d(n) n^{11/2} for n <= 10^6.
const PRIME_A: u64 = (1 << 61) - 1;
const PRIME_B: u64 = (1 << 62) - 57;

/// Integer Fourier coefficients `a(1..=N)` of a normalized eigenform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    weight: u32,
    coeffs: Vec<i128>,
}

impl CoefficientTable {
    /// Wraps `a(1), a(2), ...`; requires `a(1) = 1`.
    pub fn from_coefficients(weight: u32, coeffs: Vec<i128>) -> Result<Self> {
        if weight == 0 {
            return Err(Error::Domain("weight must be positive".into()));
        }
        if coeffs.first() != Some(&1) {
            return Err(Error::Domain("coefficient table must start with a(1) = 1".into()));
        }
        let mut padded = Vec::with_capacity(coeffs.len() + 1);
        padded.push(0);
        padded.extend(coeffs);
        Ok(Self { weight, coeffs: padded })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// `a(n)`.
    pub fn get(&self, n: usize) -> Result<i128> {
        if n == 0 || n > self.len() {
            return Err(Error::Domain(format!("n = {n} outside table range 1..={}", self.len())));
        }
        Ok(self.coeffs[n])
    }

    /// `a(n)` for `n = 1..=len`.
    pub fn values(&self) -> &[i128] {
        &self.coeffs[1..]
    }

    fn truncated(mut self, n: usize) -> Self {
        self.coeffs.truncate(n + 1);
        self
    }

    /// `lambda_f(n)^2 = a(n)^2 / n^{w-1}`.
    pub fn lambda_f_sq(&self, n: usize) -> Result<BigRational> {
        let a = BigInt::from(self.get(n)?);
        Ok(BigRational::new(&a * &a, big_pow(n as u64, self.weight - 1)))
    }

    /// `lambda_f(n)^2` as a float, for harness sums.
    pub fn lambda_f_sq_f64(&self, n: usize) -> Result<f64> {
        let a = self.get(n)? as f64;
        let scaled = a / (n as f64).powf((self.weight - 1) as f64 / 2.0);
        Ok(scaled * scaled)
    }

    /// `a(p^j)` for `j = 0..=top` from `a(p)` and the Hecke recursion.
    fn prime_power_coeffs(&self, p: u64, top: u32) -> Result<Vec<BigInt>> {
        let ap = BigInt::from(self.get(p as usize)?);
        let pw = big_pow(p, self.weight - 1);
        let mut out = vec![BigInt::one(), ap.clone()];
        while out.len() <= top as usize {
            let j = out.len();
            let next = &ap * &out[j - 1] - &pw * &out[j - 2];
            out.push(next);
        }
        out.truncate(top as usize + 1);
        Ok(out)
    }

    /// `lambda_f(m^2) = a(m^2) / m^{w-1}` with `a(m^2)` rebuilt from `a(p)`, `p | m`.
    pub fn lambda_f_at_square(&self, m: u64) -> Result<BigRational> {
        let mut num = BigInt::one();
        for (p, e) in factorize(m) {
            num *= &self.prime_power_coeffs(p, 2 * e)?[2 * e as usize];
        }
        Ok(BigRational::new(num, big_pow(m, self.weight - 1)))
    }

    /// Serializes in the `tau.cache` layout (weight 12) or the ingestion layout.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        if self.weight == DELTA_WEIGHT && self.is_delta_prefix() {
            writeln!(out, "# tau N={}", self.len())?;
        } else {
            writeln!(out, "# coeffs weight={} N={}", self.weight, self.len())?;
        }
        for (i, v) in self.values().iter().enumerate() {
            writeln!(out, "{}\t{}", i + 1, v)?;
        }
        Ok(())
    }

    fn is_delta_prefix(&self) -> bool {
        self.len() < 2 || self.coeffs[2] == -24
    }

    /// Parses either `# tau N=<N>` or `# coeffs weight=<w> N=<N>` files.
    pub fn read_from(input: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty coefficient file".into()))??;
        let (weight, n) = parse_header(header.trim_end())?;
        let mut coeffs = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(idx), Some(val), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("line {}: expected 'n value'", i + 2)));
            };
            let idx: usize = idx.parse().map_err(|_| Error::Parse(format!("line {}: bad index", i + 2)))?;
            if idx != coeffs.len() + 1 {
                return Err(Error::Parse(format!("line {}: expected n = {}", i + 2, coeffs.len() + 1)));
            }
            let val: i128 = val.parse().map_err(|_| Error::Parse(format!("line {}: bad value", i + 2)))?;
            coeffs.push(val);
        }
        if coeffs.len() != n {
            return Err(Error::Parse(format!("header declares N={n}, found {} values", coeffs.len())));
        }
        Self::from_coefficients(weight, coeffs)
    }
}

fn parse_header(line: &str) -> Result<(u32, usize)> {
    let field = |s: &str, key: &str| -> Result<usize> {
        s.strip_prefix(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header field '{s}'")))
    };
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        ["#", "tau", n] => Ok((DELTA_WEIGHT, field(n, "N=")?)),
        ["#", "coeffs", w, n] => Ok((field(w, "weight=")? as u32, field(n, "N=")?)),
        _ => Err(Error::Parse(format!("unrecognized header '{line}'"))),
    }
}

fn big_pow(base: u64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// Pentagonal exponents of `eta = prod (1 - x^n)` up to `n` with their signs.
fn pentagonal_terms(n: usize) -> Vec<(usize, i128)> {
    let mut terms = Vec::new();
    for j in 1.. {
        let g1 = j * (3 * j - 1) / 2;
        if g1 > n {
            break;
        }
        let sign = if j % 2 == 1 { -1 } else { 1 };
        terms.push((g1, sign));
        let g2 = j * (3 * j + 1) / 2;
        if g2 <= n {
            terms.push((g2, sign));
        }
    }
    terms.sort_unstable();
    terms
}

/// Coefficients of `prod (1 - x^n)^24` mod `prime`, via
/// `n f_n = sum_j (25 j - n) p_j f_{n-j}` over the sparse pentagonal series.
fn eta24_mod(len: usize, prime: u64, terms: &[(usize, i128)]) -> Vec<u64> {
    let pm = prime as i128;
    let mut f = vec![0u64; len];
    f[0] = 1;
    for n in 1..len {
        let mut acc: i128 = 0;
        for &(j, s) in terms {
            if j > n {
                break;
            }
            acc += s * (25 * j as i128 - n as i128) * f[n - j] as i128;
        }
        let r = acc.rem_euclid(pm) as u64;
        let inv = crate::residue::inv_mod(n as u64 % prime, prime).expect("n < prime");
        f[n] = crate::residue::mul_mod(r, inv, prime);
    }
    f
}

/// `tau(1..=n)` from `Delta = x prod (1 - x^n)^24`.
pub fn tau_table(n: usize) -> Result<CoefficientTable> {
    if n == 0 {
        return Err(Error::Domain("table length must be positive".into()));
    }
    if n > MAX_TABLE_LEN {
        return Err(Error::Resource(format!("tau table length {n} exceeds {MAX_TABLE_LEN}")));
    }
    let terms = pentagonal_terms(n);
    let (fa, fb) = rayon::join(|| eta24_mod(n, PRIME_A, &terms), || eta24_mod(n, PRIME_B, &terms));
    let ma = PRIME_A as u128;
    let mb = PRIME_B as u128;
    let inv_a = crate::residue::inv_mod(PRIME_A % PRIME_B, PRIME_B).expect("distinct primes") as u128;
    let modulus = ma * mb;
    let coeffs = fa
        .iter()
        .zip(&fb)
        .map(|(&a, &b)| {
            let diff = (b as u128 + mb - a as u128 % mb) % mb;
            let t = (diff * inv_a) % mb;
            let x = a as u128 + ma * t;
            if x > modulus / 2 {
                -((modulus - x) as i128)
            } else {
                x as i128
            }
        })
        .collect();
    CoefficientTable::from_coefficients(DELTA_WEIGHT, coeffs)
}

/// [`tau_table`] backed by `<dir>/tau.cache`: reused when it covers `n`,
/// regenerated and rewritten otherwise.
pub fn tau_table_cached(n: usize, dir: &Path) -> Result<CoefficientTable> {
    let path = dir.join(TAU_CACHE_FILE);
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(table) = CoefficientTable::read_from(file) {
            if table.weight == DELTA_WEIGHT && table.len() >= n && n > 0 {
                return Ok(table.truncated(n));
            }
        }
    }
    let table = tau_table(n)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("cache.tmp");
    let mut out = std::io::BufWriter::new(fs::File::create(&tmp)?);
    table.write_to(&mut out)?;
    out.flush()?;
    drop(out);
    fs::rename(&tmp, &path)?;
    Ok(table)
}

/// `A(1, n) = sum_{d^2 m = n} lambda_f(m^2)` for `n = 1..=len`, index 0 unused.
pub fn sym2_table(table: &CoefficientTable, len: usize) -> Result<Vec<BigRational>> {
    if len > table.len() {
        return Err(Error::Domain(format!(
            "symmetric-square table to {len} needs a(p) for p <= {len}, have {}",
            table.len()
        )));
    }
    let mut at_square = vec![BigRational::zero(); len + 1];
    for (m, slot) in at_square.iter_mut().enumerate().skip(1) {
        *slot = table.lambda_f_at_square(m as u64)?;
    }
    let mut out = vec![BigRational::zero(); len + 1];
    for d in (1..).take_while(|d| d * d <= len) {
        for m in 1..=len / (d * d) {
            out[d * d * m] += &at_square[m];
        }
    }
    Ok(out)
}

/// `lambda_{1 + sym^2 f}(n) = sum_{m | n} A(1, m)`, index 0 unused.
pub fn one_boxplus_table(sym2: &[BigRational]) -> Vec<BigRational> {
    let len = sym2.len().saturating_sub(1);
    let mut out = vec![BigRational::zero(); len + 1];
    for m in 1..=len {
        for n in (m..=len).step_by(m) {
            out[n] += &sym2[m];
        }
    }
    out
}

/// Both sides of `lambda_f(n)^2 = sum_{d^2 r = n} mu(d) lambda_{1 + sym^2 f}(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionCheck {
    pub n: usize,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl ConvolutionCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Evaluates the Mobius convolution identity at `n`.
pub fn convolution_identity_check(
    table: &CoefficientTable,
    boxplus: &[BigRational],
    n: usize,
) -> Result<ConvolutionCheck> {
    if n == 0 || n >= boxplus.len() {
        return Err(Error::Domain(format!("n = {n} outside the boxplus table")));
    }
    let lhs = table.lambda_f_sq(n)?;
    let mut rhs = BigRational::zero();
    for d in (1..).take_while(|d| d * d <= n) {
        if n % (d * d) == 0 {
            match mobius(d as u64) {
                1 => rhs += &boxplus[n / (d * d)],
                -1 => rhs -= &boxplus[n / (d * d)],
                _ => {}
            }
        }
    }
    Ok(ConvolutionCheck { n, lhs, rhs })
}

/// Complete homogeneous symmetric polynomials `h_0..=h_top` of the Satake
/// multiset `{alpha^2, 1, alpha^-2}` of `sym^2 f` at `p`, through Newton's
/// identities on the power sums `alpha^{2k} + 1 + alpha^{-2k}`.
fn sym2_complete_symmetric(table: &CoefficientTable, p: u64, top: usize) -> Result<Vec<BigRational>> {
    let two = BigRational::from_integer(BigInt::from(2));
    // alpha^2 + alpha^-2 = lambda_f(p)^2 - 2
    let t = table.lambda_f_sq(p as usize)? - &two;
    let mut u = vec![two, t.clone()];
    for k in 2..=top {
        let next = &t * &u[k - 1] - &u[k - 2];
        u.push(next);
    }
    let power: Vec<BigRational> = u.iter().map(|x| x + BigRational::one()).collect();
    let mut h = vec![BigRational::one()];
    for k in 1..=top {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            acc += &power[i] * &h[k - i];
        }
        h.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    Ok(h)
}

/// Memoized `A(p^a, p^b)` for the symmetric square of a fixed form.
pub struct Gl3Coefficients<'a> {
    table: &'a CoefficientTable,
    h: HashMap<u64, Vec<BigRational>>,
}

impl<'a> Gl3Coefficients<'a> {
    pub fn new(table: &'a CoefficientTable) -> Self {
        Self { table, h: HashMap::new() }
    }

    fn h_at(&mut self, p: u64, top: usize) -> Result<&[BigRational]> {
        let stale = self.h.get(&p).map_or(true, |v| v.len() <= top);
        if stale {
            let fresh = sym2_complete_symmetric(self.table, p, top.max(8))?;
            self.h.insert(p, fresh);
        }
        Ok(&self.h[&p])
    }

    /// Schur polynomial `s_{(a+b, a)}` by Jacobi-Trudi:
    /// `h_{a+b} h_a - h_{a+b+1} h_{a-1}`.
    pub fn prime_power(&mut self, p: u64, a: u32, b: u32) -> Result<BigRational> {
        let (a, b) = (a as usize, b as usize);
        let h = self.h_at(p, a + b + 1)?;
        let mut s = &h[a + b] * &h[a];
        if a > 0 {
            s -= &h[a + b + 1] * &h[a - 1];
        }
        Ok(s)
    }

    /// `A(n1, n2)` extended multiplicatively over primes.
    pub fn coeff(&mut self, n1: u64, n2: u64) -> Result<BigRational> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Domain("GL3 indices must be positive".into()));
        }
        let mut exps: Vec<(u64, u32, u32)> = Vec::new();
        for (p, e) in factorize(n1) {
            exps.push((p, e, 0));
        }
        for (p, e) in factorize(n2) {
            match exps.iter_mut().find(|t| t.0 == p) {
                Some(t) => t.2 = e,
                None => exps.push((p, 0, e)),
            }
        }
        let mut out = BigRational::one();
        for (p, a, b) in exps {
            out *= self.prime_power(p, a, b)?;
        }
        Ok(out)
    }
}

/// `A(n1, n2)` for `sym^2 f`.
pub fn gl3_coeff(table: &CoefficientTable, n1: u64, n2: u64) -> Result<BigRational> {
    Gl3Coefficients::new(table).coeff(n1, n2)
}

/// `sum_{n1^2 n2 <= N} |A(n1, n2)|^2 / N`.
pub fn rankin_selberg_ratio(table: &CoefficientTable, big_n: u64) -> Result<f64> {
    if big_n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let mut gl3 = Gl3Coefficients::new(table);
    let mut total = crate::sum::CompensatedSum::new();
    for n1 in (1..).take_while(|n| n * n <= big_n) {
        for n2 in 1..=big_n / (n1 * n1) {
            let a = gl3.coeff(n1, n2)?;
            let v = a.abs().to_f64().unwrap_or(f64::INFINITY);
            total.add(v * v);
        }
    }
    Ok(total.value() / big_n as f64)
}

/// Exact-rational to float at the harness boundary.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn tau_examples() {
        let t = tau_table(30).unwrap();
        assert_eq!(t.get(1).unwrap(), 1);
        assert_eq!(t.get(2).unwrap(), -24);
        assert_eq!(t.get(3).unwrap(), 252);
        assert_eq!(t.get(4).unwrap(), -1472);
        assert_eq!(t.get(5).unwrap(), 4830);
        assert_eq!(t.get(11).unwrap(), 534612);
        assert_eq!(t.get(30).unwrap(), -29211840);
        assert!(matches!(tau_table(MAX_TABLE_LEN + 1), Err(Error::Resource(_))));
        assert!(matches!(t.get(31), Err(Error::Domain(_))));
    }

    #[test]
    fn tau_large_values() {
        let t = tau_table(1000).unwrap();
        // tau(1000) = tau(8) tau(125)
        assert_eq!(t.get(1000).unwrap(), t.get(8).unwrap() * t.get(125).unwrap());
        assert_eq!(t.get(8).unwrap(), 84480);
        assert_eq!(t.get(125).unwrap(), -359001100500);
    }

    #[test]
    fn tau_hecke_relations() {
        let t = tau_table(10_000).unwrap();
        for n in 1..=10_000usize {
            for (p, e) in factorize(n as u64) {
                let pe = p.pow(e) as usize;
                if pe != n {
                    assert_eq!(t.get(n).unwrap(), t.get(pe).unwrap() * t.get(n / pe).unwrap());
                }
            }
        }
        for p in (2..=100u64).filter(|&p| crate::residue::is_prime(p)) {
            let mut j = 1;
            while p.pow(j + 1) <= 10_000 {
                let lhs = t.get(p.pow(j + 1) as usize).unwrap();
                let prev = if j == 1 { 1 } else { t.get(p.pow(j - 1) as usize).unwrap() };
                let rhs = t.get(p as usize).unwrap() * t.get(p.pow(j) as usize).unwrap()
                    - (p as i128).pow(11) * prev;
                assert_eq!(lhs, rhs);
                j += 1;
            }
        }
    }

    #[test]
    fn lambda_examples() {
        let t = tau_table(10).unwrap();
        assert_eq!(t.lambda_f_sq(1).unwrap(), q(1, 1));
        assert_eq!(t.lambda_f_sq(2).unwrap(), q(9, 32));
        assert_eq!(t.lambda_f_sq(6).unwrap(), t.lambda_f_sq(2).unwrap() * t.lambda_f_sq(3).unwrap());
        assert!((t.lambda_f_sq_f64(2).unwrap() - 9.0 / 32.0).abs() < 1e-15);
        assert_eq!(t.lambda_f_at_square(2).unwrap(), q(-23, 32));
    }

    #[test]
    fn sym2_and_boxplus_examples() {
        let t = tau_table(20).unwrap();
        let s = sym2_table(&t, 8).unwrap();
        assert_eq!(s[1], q(1, 1));
        assert_eq!(s[2], q(-23, 32));
        assert_eq!(s[4], q(987136, 1 << 22) + q(1, 1));
        let b = one_boxplus_table(&s);
        assert_eq!(b[1], q(1, 1));
        assert_eq!(b[2], q(9, 32));
        assert_eq!(b[4], q(1, 1) + &s[2] + &s[4]);
        assert!(sym2_table(&t, 21).is_err());
    }

    #[test]
    fn convolution_examples() {
        let t = tau_table(200).unwrap();
        let b = one_boxplus_table(&sym2_table(&t, 200).unwrap());
        for n in 1..=200 {
            let c = convolution_identity_check(&t, &b, n).unwrap();
            assert!(c.holds(), "n = {n}");
        }
        assert_eq!(convolution_identity_check(&t, &b, 2).unwrap().lhs, q(9, 32));
    }

    #[test]
    fn gl3_matches_sym2_on_prime_powers() {
        let t = tau_table(700).unwrap();
        let s = sym2_table(&t, 700).unwrap();
        for p in [2u64, 3, 5] {
            for j in 0..=4 {
                let n = p.pow(j);
                if n as usize <= 700 {
                    assert_eq!(gl3_coeff(&t, 1, n).unwrap(), s[n as usize], "p^{j} = {n}");
                }
            }
        }
        assert_eq!(gl3_coeff(&t, 1, 1).unwrap(), q(1, 1));
        for (a, b) in [(2u64, 3u64), (4, 2), (6, 10), (9, 5)] {
            assert_eq!(gl3_coeff(&t, a, b).unwrap(), gl3_coeff(&t, b, a).unwrap());
        }
    }

    #[test]
    fn newton_and_elementary_recurrences_agree() {
        let t = tau_table(10).unwrap();
        let h = sym2_complete_symmetric(&t, 2, 8).unwrap();
        let e1 = t.lambda_f_sq(2).unwrap() - BigRational::one();
        let mut alt = vec![BigRational::one(), e1.clone(), &e1 * &e1 - &e1];
        for k in 3..=8 {
            let next = &e1 * &alt[k - 1] - &e1 * &alt[k - 2] + &alt[k - 3];
            alt.push(next);
        }
        assert_eq!(h, alt);
    }

    #[test]
    fn cache_and_ingestion_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = tau_table_cached(50, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(TAU_CACHE_FILE)).unwrap();
        assert!(text.starts_with("# tau N=50\n1\t1\n2\t-24\n"));
        let b = tau_table_cached(40, dir.path()).unwrap();
        assert_eq!(b.values(), &a.values()[..40]);
        let c = tau_table_cached(60, dir.path()).unwrap();
        assert_eq!(c.len(), 60);

        let src = "# coeffs weight=12 N=3\n1\t1\n2\t-24\n3\t252\n";
        let t = CoefficientTable::read_from(src.as_bytes()).unwrap();
        assert_eq!(t.values(), &[1, -24, 252]);
        for bad in ["# coeffs weight=12 N=3\n1\t1\n2\t-24\n", "# tau N=2\n1\t1\n3\t5\n", "nonsense\n"] {
            assert!(matches!(CoefficientTable::read_from(bad.as_bytes()), Err(Error::Parse(_))));
        }
    }

    #[test]
    fn rankin_selberg_small() {
        let t = tau_table(1000).unwrap();
        let r = rankin_selberg_ratio(&t, 1000).unwrap();
        assert!(r > 0.0 && r <= 10.0, "{r}");
    }
}
