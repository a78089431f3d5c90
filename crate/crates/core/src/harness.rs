//! Numerical experiments on top of the exact machinery: the progression
//! discrepancy of `lambda_f(n)^2`, the twisted sum of `A(1, m) Kl_4(m l)`,
//! a Poisson summation check and the `beta`-sum factorization check.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::closed::{kl3_closed_table, kl4_table_via_kl3};
use crate::error::{Error, Result};
use crate::hecke::{sym2_table, to_f64, CoefficientTable};
use crate::residue::{inv_mod, is_prime, mul_mod, reduce, PrimePowerModulus, UnitResidue};
use crate::expsum::{PhaseTable, RationalPhase};
use crate::sum::{CompensatedSum, ComplexSum};

/// Reporting exponent in the discrepancy reference `(X/q)^{1 - delta}`.
pub const DEFAULT_DELTA: f64 = 0.05;

/// CSV header of discrepancy scans.
pub const CSV_HEADER: &str = "X,q,a,E,reference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BumpKind {
    #[default]
    Smooth,
    SharpCut,
}

/// Weight supported on `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BumpFunction {
    pub kind: BumpKind,
}

impl BumpFunction {
    pub fn smooth() -> Self {
        Self { kind: BumpKind::Smooth }
    }

    pub fn sharp_cut() -> Self {
        Self { kind: BumpKind::SharpCut }
    }

    /// `exp(-1 / (1 - (2x - 3)^2))` on `(1, 2)`, or the indicator of `(1, 2]`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            BumpKind::Smooth => {
                if x <= 1.0 || x >= 2.0 {
                    return 0.0;
                }
                let t = 2.0 * x - 3.0;
                (-1.0 / (1.0 - t * t)).exp()
            }
            BumpKind::SharpCut => {
                if x > 1.0 && x <= 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Integers `n` with `V(n / scale)` possibly nonzero.
    pub fn integer_support(&self, scale: f64) -> std::ops::RangeInclusive<usize> {
        let lo = scale.floor() as usize + 1;
        let hi = (2.0 * scale).floor() as usize;
        lo..=hi
    }
}

/// Table length needed for a cutoff `X` (every `n <= 2X`).
pub fn required_table_len(x: f64) -> usize {
    (2.0 * x).floor().max(1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyRow {
    pub x: f64,
    pub q: u64,
    pub a: u64,
    pub e: f64,
    pub reference: f64,
}

impl DiscrepancyRow {
    pub fn to_csv_line(&self) -> String {
        format!("{},{},{},{},{}", fmt_g17(self.x), self.q, self.a, fmt_g17(self.e), fmt_g17(self.reference))
    }
}

/// `printf("%.17g")` formatting.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        strip_zeros(&fixed).to_string()
    } else {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Per-residue sums `sum_{n = b mod q} lambda_f(n)^2 V(n/X)` in ascending `n`,
/// plus the sum over all `n` coprime to `q`.
struct ResidueBuckets {
    by_residue: Vec<f64>,
    coprime_total: f64,
}

fn residue_buckets(
    x: f64,
    q: u64,
    bump: &BumpFunction,
    table: &CoefficientTable,
) -> Result<ResidueBuckets> {
    let need = required_table_len(x);
    if table.len() < need {
        return Err(Error::Resource(format!(
            "cutoff X = {x} needs coefficients up to N = {need}, table has {}",
            table.len()
        )));
    }
    let mut buckets = vec![CompensatedSum::new(); q as usize];
    let mut total = CompensatedSum::new();
    for n in bump.integer_support(x) {
        let v = bump.eval(n as f64 / x);
        if v == 0.0 {
            continue;
        }
        let r = (n as u64 % q) as usize;
        if (r as u64).gcd(&q) != 1 {
            continue;
        }
        let w = table.lambda_f_sq_f64(n)? * v;
        buckets[r].add(w);
        total.add(w);
    }
    Ok(ResidueBuckets {
        by_residue: buckets.iter().map(|s| s.value()).collect(),
        coprime_total: total.value(),
    })
}

/// `E(X, q, a) = sum_{n = a} lambda_f(n)^2 V(n/X) - phi(q)^{-1} sum_{(n,q)=1} lambda_f(n)^2 V(n/X)`.
pub fn discrepancy(
    x: f64,
    modulus: &PrimePowerModulus,
    a: &UnitResidue,
    bump: &BumpFunction,
    table: &CoefficientTable,
) -> Result<DiscrepancyRow> {
    discrepancy_with_delta(x, modulus, a, bump, table, DEFAULT_DELTA)
}

pub fn discrepancy_with_delta(
    x: f64,
    modulus: &PrimePowerModulus,
    a: &UnitResidue,
    bump: &BumpFunction,
    table: &CoefficientTable,
    delta: f64,
) -> Result<DiscrepancyRow> {
    let q = modulus.q();
    if a.modulus() != q {
        return Err(Error::Domain(format!("residue is mod {}, expected mod {q}", a.modulus())));
    }
    check_cutoff(x)?;
    let b = residue_buckets(x, q, bump, table)?;
    Ok(row(x, q, a.value(), &b, modulus.phi(), delta))
}

fn check_cutoff(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("cutoff X = {x} must be positive")));
    }
    Ok(())
}

fn row(x: f64, q: u64, a: u64, b: &ResidueBuckets, phi: u64, delta: f64) -> DiscrepancyRow {
    DiscrepancyRow {
        x,
        q,
        a,
        e: b.by_residue[a as usize] - b.coprime_total / phi as f64,
        reference: (x / q as f64).powf(1.0 - delta),
    }
}

/// Rows for every unit `a` and every cutoff, plus growth summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub rows: Vec<DiscrepancyRow>,
    /// `(X, max_a |E|)` in the order of the requested cutoffs.
    pub max_abs: Vec<(f64, f64)>,
    /// `(X, sum_a E)`.
    pub telescoping: Vec<(f64, f64)>,
    /// Least-squares slope of `log max_a |E|` against `log X`.
    pub slope: Option<f64>,
}

impl ScanReport {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.csv_string().as_bytes())?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.to_csv_line());
        }
        s
    }
}

pub fn discrepancy_scan(
    modulus: &PrimePowerModulus,
    xs: &[f64],
    bump: &BumpFunction,
    table: &CoefficientTable,
    delta: f64,
) -> Result<ScanReport> {
    let q = modulus.q();
    let phi = modulus.phi();
    for &x in xs {
        check_cutoff(x)?;
    }
    let per_x: Vec<Result<Vec<DiscrepancyRow>>> = xs
        .par_iter()
        .map(|&x| {
            let b = residue_buckets(x, q, bump, table)?;
            Ok((0..q)
                .filter(|&a| modulus.is_unit(a))
                .map(|a| row(x, q, a, &b, phi, delta))
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    let mut max_abs = Vec::new();
    let mut telescoping = Vec::new();
    for (x, block) in xs.iter().zip(per_x) {
        let block = block?;
        let m = block.iter().map(|r| r.e.abs()).fold(0.0, f64::max);
        max_abs.push((*x, m));
        telescoping.push((*x, block.iter().map(|r| r.e).collect::<CompensatedSum>().value()));
        rows.extend(block);
    }
    let slope = log_log_slope(&max_abs);
    Ok(ScanReport { rows, max_abs, telescoping, slope })
}

fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistedReport {
    pub value: Complex64,
    /// `p^{3/4} N^{3/4} q^{3/10} + N^{1/2} q^{13/20}`.
    pub reference: f64,
    pub terms: usize,
}

/// `S(N) = sum_m A(1, m) Kl_4(m l; q) V(m/N)`.
pub fn twisted_sum(
    n_cut: f64,
    ell: i64,
    modulus: &PrimePowerModulus,
    bump: &BumpFunction,
    table: &CoefficientTable,
) -> Result<TwistedReport> {
    check_cutoff(n_cut)?;
    let q = modulus.q();
    let p = modulus.p() as f64;
    let reference = p.powf(0.75) * n_cut.powf(0.75) * (q as f64).powf(0.3)
        + n_cut.sqrt() * (q as f64).powf(0.65);
    let support = bump.integer_support(n_cut);
    let top = *support.end();
    if top == 0 || support.is_empty() {
        return Ok(TwistedReport { value: Complex64::new(0.0, 0.0), reference, terms: 0 });
    }
    let kl4 = kl4_table_via_kl3(modulus)?;
    let sym2 = sym2_table(table, top).map_err(|_| {
        Error::Resource(format!("twisted sum to N = {n_cut} needs coefficients up to {top}"))
    })?;
    let l = reduce(ell, q);
    let mut acc = ComplexSum::new();
    let mut terms = 0;
    for m in support {
        let v = bump.eval(m as f64 / n_cut);
        if v == 0.0 {
            continue;
        }
        let k = kl4[mul_mod(m as u64 % q, l, q) as usize];
        acc.add(k * (to_f64(&sym2[m]) * v));
        terms += 1;
    }
    Ok(TwistedReport { value: acc.value(), reference, terms })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

const POISSON_CUTOFF: f64 = 1e-16;

/// `sum_{n = beta mod c} w(n)` against `c^{-1} sum_n w^(n/c) e(n beta / c)` for
/// `w(x) = exp(-pi x^2 / sigma^2)`, `w^(y) = sigma exp(-pi sigma^2 y^2)`.
pub fn poisson_check(c: u64, beta: i64, sigma: f64) -> Result<PoissonCheck> {
    if c == 0 {
        return Err(Error::Domain("modulus c must be positive".into()));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must be positive")));
    }
    let pi = std::f64::consts::PI;
    let w = |x: f64| (-pi * x * x / (sigma * sigma)).exp();
    let w_hat = |y: f64| sigma * (-pi * sigma * sigma * y * y).exp();

    let b = reduce(beta, c) as i64;
    let ci = c as i64;
    let mut lhs = CompensatedSum::new();
    // n = b + j c for j >= 0, then n = b - j c for j >= 1
    for dir in [1i64, -1] {
        let mut j: i64 = if dir == 1 { 0 } else { 1 };
        loop {
            let n = (b + dir * j * ci) as f64;
            let t = w(n);
            lhs.add(t);
            if t < POISSON_CUTOFF && n.abs() > sigma {
                break;
            }
            j += 1;
        }
    }

    let mut rhs = CompensatedSum::new();
    rhs.add(w_hat(0.0));
    let mut n: i64 = 1;
    loop {
        let t = w_hat(n as f64 / c as f64);
        let phase = RationalPhase::new(n * b, c)?.value();
        rhs.add(2.0 * t * phase.re);
        if t < POISSON_CUTOFF {
            break;
        }
        n += 1;
    }
    let lhs = lhs.value();
    let rhs = rhs.value() / c as f64;
    Ok(PoissonCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFactorization {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `m = -u p^{k - lambda} mod c`.
    pub congruence_holds: bool,
    pub residual: f64,
}

/// Largest `c p^k` accepted by [`beta_factorization_check`].
pub const BETA_CHECK_BUDGET: u64 = 100_000;

/// `sum_{beta mod c p^k} Kl_4(beta l; q) e(-M beta / (c p^k))` against
/// `c p^{k/2} Kl_3(c l / M; q) [c | M]`, `M = m + u p^{k - lambda}`.
#[allow(clippy::too_many_arguments)]
pub fn beta_factorization_check(
    c: u64,
    p: u64,
    k: u32,
    lambda: u32,
    m: i64,
    u: i64,
    ell: i64,
) -> Result<BetaFactorization> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("p = {p} is not prime")));
    }
    let md = PrimePowerModulus::new(p, k)?;
    if c == 0 || c % p == 0 {
        return Err(Error::Domain(format!("c = {c} must be positive and coprime to p")));
    }
    if lambda > k {
        return Err(Error::Domain(format!("lambda = {lambda} exceeds k = {k}")));
    }
    if reduce(ell, p) == 0 {
        return Err(Error::Domain(format!("ell = {ell} must be a unit mod {p}")));
    }
    let q = md.q();
    let big = c.checked_mul(q).filter(|&v| v <= BETA_CHECK_BUDGET).ok_or_else(|| {
        Error::Resource(format!("c p^k = {c} * {q} exceeds {BETA_CHECK_BUDGET}"))
    })?;
    let kl4 = kl4_table_via_kl3(&md)?;
    let kl3 = kl3_closed_table(&md)?;
    let shift = p.pow(k - lambda) as i128;
    let big_m = m as i128 + u as i128 * shift;
    let m_mod = big_m.rem_euclid(big as i128) as u64;
    let l = reduce(ell, q);
    let phases = PhaseTable::new(big)?;
    let lhs: ComplexSum = (0..big)
        .map(|beta| {
            let k4 = kl4[mul_mod(beta % q, l, q) as usize];
            k4 * phases.at((big - mul_mod(m_mod, beta, big)) % big)
        })
        .collect();
    let lhs = lhs.value();
    let congruence_holds = big_m.rem_euclid(c as i128) == 0;
    let m_q = big_m.rem_euclid(q as i128) as u64;
    let rhs = match (congruence_holds, inv_mod(m_q, q)) {
        (true, Some(m_inv)) => {
            let arg = mul_mod(mul_mod(c % q, l, q), m_inv, q);
            kl3[arg as usize] * (c as f64 * (q as f64).sqrt())
        }
        _ => Complex64::new(0.0, 0.0),
    };
    Ok(BetaFactorization { lhs, rhs, congruence_holds, residual: (lhs - rhs).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::tau_table;

    fn md(p: u64, k: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, k).unwrap()
    }

    #[test]
    fn bump_values() {
        let v = BumpFunction::smooth();
        assert!((v.eval(1.5) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(v.eval(1.0), 0.0);
        assert_eq!(v.eval(2.0), 0.0);
        assert_eq!(v.eval(0.3), 0.0);
        assert_eq!(BumpFunction::sharp_cut().eval(2.0), 1.0);
        assert_eq!(v.integer_support(10.0), 11..=20);
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(1000.0), "1000");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_g17(0.0), "0");
    }

    #[test]
    fn discrepancy_empty_and_telescoping() {
        let t = tau_table(2000).unwrap();
        let m = md(5, 2);
        // X = 0.4: no integer in (0.4, 0.8)
        let r = discrepancy(0.4, &m, &UnitResidue::new(2, 25).unwrap(), &BumpFunction::smooth(), &t).unwrap();
        assert_eq!(r.e, 0.0);

        let scan = discrepancy_scan(&m, &[100.0, 1000.0], &BumpFunction::smooth(), &t, DEFAULT_DELTA).unwrap();
        assert_eq!(scan.rows.len(), 2 * 20);
        for (_, s) in &scan.telescoping {
            assert!(s.abs() < 1e-10 * 2000.0);
        }
        assert!(scan.csv_string().starts_with("X,q,a,E,reference\n100,25,1,"));
        let single = discrepancy(1000.0, &m, &UnitResidue::new(7, 25).unwrap(), &BumpFunction::smooth(), &t).unwrap();
        assert!(scan.rows.contains(&single));

        let err = discrepancy(1001.0, &m, &UnitResidue::new(1, 25).unwrap(), &BumpFunction::smooth(), &t);
        assert!(matches!(err, Err(Error::Resource(msg)) if msg.contains("2002")));
    }

    #[test]
    fn twisted_sum_examples() {
        let t = tau_table(1000).unwrap();
        let m = md(5, 2);
        let zero = twisted_sum(500.0, 5, &m, &BumpFunction::smooth(), &t).unwrap();
        assert_eq!(zero.value, Complex64::new(0.0, 0.0));
        let s = twisted_sum(500.0, 1, &m, &BumpFunction::smooth(), &t).unwrap();
        assert!(s.value.norm() <= 10.0 * s.reference);
        assert!(s.terms > 0);
        let tiny = twisted_sum(0.3, 1, &m, &BumpFunction::smooth(), &t).unwrap();
        assert_eq!(tiny.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn poisson_examples() {
        assert!(poisson_check(1, 0, 1.0).unwrap().residual < 1e-12);
        assert!(poisson_check(25, 3, 40.0).unwrap().residual < 1e-10);
        assert!(poisson_check(49, 1, 5.0).unwrap().residual < 1e-10);
    }

    #[test]
    fn beta_factorization_examples() {
        // M = m + 25 u; c = 2 needs M even
        let hit = beta_factorization_check(2, 5, 3, 1, 1, 1, 1).unwrap();
        assert!(hit.congruence_holds);
        assert!(hit.residual < 1e-7, "{hit:?}");
        assert!(hit.rhs.norm() > 0.0 || hit.lhs.norm() < 1e-7);
        let miss = beta_factorization_check(2, 5, 3, 1, 2, 1, 1).unwrap();
        assert!(!miss.congruence_holds);
        assert!(miss.lhs.norm() < 1e-7);
        let plain = beta_factorization_check(1, 7, 2, 1, 3, 2, 2).unwrap();
        assert!(plain.residual < 1e-7);
    }
}
