//! Property sweeps over fixed parameter grids. Each suite records the number
//! of cases, the largest residual, the largest bound ratio and the first
//! counterexample.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;

use crate::bench::sample_units;
use crate::closed::{kl3_closed_table, kl4_table_via_kl3, kl4_vanishing_check};
use crate::corr::{
    c_a_fourier, c_a_reduced, c_corr_with_table, frak_c, frak_c1, frak_c2, CorrelationParams, FrakCParams, Sign,
    DEFAULT_SLACK,
};
use crate::error::{Error, Result};
use crate::expsum::{hyper_kloosterman_all, kloosterman_s, ramanujan_sum, ramanujan_sum_brute};
use crate::harness::{beta_factorization_check, discrepancy_scan, poisson_check, twisted_sum, BumpFunction, DEFAULT_DELTA};
use crate::hecke::{
    convolution_identity_check, one_boxplus_table, rankin_selberg_ratio, sym2_table, tau_table, CoefficientTable,
    Gl3Coefficients,
};
use crate::residue::{factorize, inv_mod, PrimePowerModulus};
use crate::sum::sum_tolerance;

pub const VANISHING_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const BETA_TOL: f64 = 1e-7;
pub const POISSON_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Full,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            _ => Err(Error::Parse(format!("unknown profile '{s}' (expected quick or full)"))),
        }
    }
}

/// Deliberate defects used to check that the sweeps catch them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negates the Jacobi factor of the `Kl_3` closed form.
    FlipJacobiSign,
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Fault::None),
            "jacobi-sign" => Ok(Fault::FlipJacobiSign),
            _ => Err(Error::Parse(format!("unknown fault '{s}' (expected none or jacobi-sign)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub id: &'static str,
    pub title: &'static str,
    pub grid: String,
    pub cases: u64,
    pub max_residual: f64,
    pub max_bound_ratio: Option<f64>,
    pub failure: Option<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok  " } else { "FAIL" };
        write!(
            f,
            "{status} {:<24} cases={:<8} max_residual={:.3e}",
            self.id, self.cases, self.max_residual
        )?;
        if let Some(r) = self.max_bound_ratio {
            write!(f, " max_bound_ratio={r:.4}")?;
        }
        write!(f, " time={:.2}s  [{}; {}]", self.elapsed.as_secs_f64(), self.title, self.grid)?;
        if let Some(msg) = &self.failure {
            write!(f, "\n     counterexample: {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub profile: Profile,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn first_failure(&self) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| !s.passed())
    }

    pub fn suite(&self, id: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.id == id)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        let failed = self.suites.iter().filter(|s| !s.passed()).count();
        write!(f, "{} suites, {failed} failed", self.suites.len())
    }
}

/// Running tally for one suite.
struct Tally {
    cases: u64,
    max_residual: f64,
    max_ratio: Option<f64>,
    failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, max_residual: 0.0, max_ratio: None, failure: None }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        if self.failure.is_none() {
            self.failure = Some(msg());
        }
    }

    fn residual(&mut self, r: f64, tol: f64, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        if r.is_nan() || r > tol {
            self.fail(|| format!("{}: residual {r:.3e} > {tol:.1e}", ctx()));
        }
        if r > self.max_residual || r.is_nan() {
            self.max_residual = r;
        }
    }

    fn ratio(&mut self, value: f64, reference: f64, slack: f64, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        let ratio = value / reference;
        self.max_ratio = Some(self.max_ratio.map_or(ratio, |m: f64| m.max(ratio)));
        if !(ratio <= slack) {
            self.fail(|| format!("{}: |value| = {value:.6e} exceeds {slack} x {reference:.6e}", ctx()));
        }
    }

    fn check(&mut self, ok: bool, ctx: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(ctx);
        }
    }

    fn finish(self, id: &'static str, title: &'static str, grid: String, start: Instant) -> SuiteReport {
        SuiteReport {
            id,
            title,
            grid,
            cases: self.cases,
            max_residual: self.max_residual,
            max_bound_ratio: self.max_ratio,
            failure: self.failure,
            elapsed: start.elapsed(),
        }
    }
}

fn md(p: u64, k: u32) -> PrimePowerModulus {
    PrimePowerModulus::new(p, k).expect("grid moduli are valid")
}

fn units(m: &PrimePowerModulus) -> impl Iterator<Item = u64> + '_ {
    (1..m.q()).filter(move |&a| m.is_unit(a))
}

/// Suite ids in execution order.
pub const SUITES: &[&str] = &[
    "kl3-closed-form",
    "deligne",
    "kl4-reduction",
    "kl4-vanishing",
    "correlation-vanishing",
    "correlation-bound",
    "ca-identities",
    "frakc-factorization",
    "frakc1-vanishing-bound",
    "frakc2-vanishing-bound",
    "kloosterman-crt",
    "beta-factorization",
    "ramanujan",
    "tau-exact",
    "sym2-convolution",
    "gl3",
    "rankin-selberg",
    "poisson",
    "discrepancy",
    "twisted-sum",
];

/// Runs every suite.
pub fn verify(profile: Profile, fault: Fault) -> Result<VerifyReport> {
    let mut ctx = Context::new(profile, fault);
    let suites = SUITES.iter().map(|id| run(&mut ctx, id)).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { profile, suites })
}

/// Runs a single suite by id.
pub fn verify_suite(id: &str, profile: Profile, fault: Fault) -> Result<SuiteReport> {
    run(&mut Context::new(profile, fault), id)
}

struct Context {
    profile: Profile,
    fault: Fault,
    tau: Option<CoefficientTable>,
}

impl Context {
    fn new(profile: Profile, fault: Fault) -> Self {
        Self { profile, fault, tau: None }
    }

    fn full(&self) -> bool {
        self.profile == Profile::Full
    }

    fn tau(&mut self, n: usize) -> Result<&CoefficientTable> {
        if self.tau.as_ref().map_or(true, |t| t.len() < n) {
            let len = if self.full() { 200_000 } else { 20_000 };
            self.tau = Some(tau_table(len.max(n))?);
        }
        Ok(self.tau.as_ref().expect("just built"))
    }
}

fn run(ctx: &mut Context, id: &str) -> Result<SuiteReport> {
    match id {
        "kl3-closed-form" => kl3_closed_form(ctx),
        "deligne" => deligne(ctx),
        "kl4-reduction" => kl4_reduction(ctx),
        "kl4-vanishing" => kl4_vanishing(ctx),
        "correlation-vanishing" => correlation_vanishing(ctx),
        "correlation-bound" => correlation_bound(ctx),
        "ca-identities" => ca_identities(ctx),
        "frakc-factorization" => frakc_factorization(ctx),
        "frakc1-vanishing-bound" => frakc1_suite(ctx),
        "frakc2-vanishing-bound" => frakc2_suite(ctx),
        "kloosterman-crt" => kloosterman_crt(ctx),
        "beta-factorization" => beta_factorization(ctx),
        "ramanujan" => ramanujan(ctx),
        "tau-exact" => tau_exact(ctx),
        "sym2-convolution" => sym2_convolution(ctx),
        "gl3" => gl3(ctx),
        "rankin-selberg" => rankin_selberg(ctx),
        "poisson" => poisson(ctx),
        "discrepancy" => discrepancy(ctx),
        "twisted-sum" => twisted(ctx),
        _ => Err(Error::Domain(format!("unknown suite '{id}'"))),
    }
}

fn kl3_closed_form(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let primes = [5u64, 7, 11, 13];
    let exhaustive: Vec<(u64, u32)> = if ctx.full() {
        primes.iter().flat_map(|&p| [(p, 2), (p, 3)]).collect()
    } else {
        vec![(5, 2), (7, 2), (11, 2), (13, 2), (5, 3), (7, 3)]
    };
    let sampled: Vec<(u64, u32)> = if ctx.full() { primes.iter().map(|&p| (p, 4)).collect() } else { vec![] };
    let sign = if ctx.fault == Fault::FlipJacobiSign { -1.0 } else { 1.0 };
    for (p, k, all) in exhaustive.iter().map(|&(p, k)| (p, k, true)).chain(sampled.iter().map(|&(p, k)| (p, k, false))) {
        let m = md(p, k);
        let closed = kl3_closed_table(&m)?;
        let brute = hyper_kloosterman_all(3, m.q())?;
        let tol = sum_tolerance(m.q());
        let args: Vec<u64> = if all { units(&m).collect() } else { sample_units(&m, 100, 2024 + p) };
        for a in args {
            let c = closed[a as usize] * sign;
            let b = brute[a as usize];
            t.residual((c - b).norm(), tol, || {
                format!("Kl_3 closed form: p={p} k={k} a={a}: closed={c:.6} brute={b:.6}")
            });
        }
    }
    let grid = if ctx.full() {
        "p in {5,7,11,13}, k in {2,3} all units; k=4, 100 seeded units".into()
    } else {
        "p in {5,7,11,13} k=2, p in {5,7} k=3, all units".into()
    };
    Ok(t.finish("kl3-closed-form", "Kl_3 closed form equals brute force", grid, start))
}

fn deligne(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut moduli = vec![5u64, 7, 11, 13, 25, 49];
    if ctx.full() {
        moduli.extend([121, 125, 169, 343]);
    }
    for &q in &moduli {
        for d in 2..=4u32 {
            let all = hyper_kloosterman_all(d, q)?;
            for (a, v) in all.iter().enumerate().filter(|(a, _)| (*a as u64).gcd(&q) == 1) {
                t.ratio(v.norm(), d as f64, 1.0 + 1e-9, || format!("|Kl_{d}({a}; {q})|"));
            }
        }
    }
    let grid = format!("d in {{2,3,4}}, q in {moduli:?}, all units");
    Ok(t.finish("deligne", "|Kl_d(a;q)| <= d", grid, start))
}

fn kl4_reduction(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut grid = vec![(5u64, 2u32), (7, 2)];
    if ctx.full() {
        grid.extend([(11, 2), (13, 2), (5, 3), (7, 3)]);
    }
    for &(p, k) in &grid {
        let m = md(p, k);
        let via = kl4_table_via_kl3(&m)?;
        let brute = hyper_kloosterman_all(4, m.q())?;
        for b in 0..m.q() as usize {
            t.residual((via[b] - brute[b]).norm(), IDENTITY_TOL, || format!("Kl_4({b}; {p}^{k})"));
        }
    }
    Ok(t.finish("kl4-reduction", "Kl_4 via Kl_3 equals brute force", format!("(p,k) in {grid:?}, all residues"), start))
}

fn kl4_vanishing(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let ks: &[u32] = if ctx.full() { &[2, 3] } else { &[2] };
    for p in [5u64, 7] {
        for &k in ks {
            let m = md(p, k);
            for shift in (0..m.q()).step_by(p as usize) {
                for a in [1i64, 2, 3] {
                    let r = kl4_vanishing_check(shift as i64, a, &m)?.norm();
                    t.residual(r, VANISHING_TOL, || format!("Kl_4({a} * {shift}; {p}^{k})"));
                }
            }
        }
    }
    Ok(t.finish("kl4-vanishing", "Kl_4(a m) = 0 for p | m", format!("p in {{5,7}}, k in {ks:?}, a in {{1,2,3}}"), start))
}

fn corr_moduli(ctx: &Context) -> Vec<(u64, u32)> {
    if ctx.full() {
        vec![(5, 2), (7, 2), (5, 3), (7, 3)]
    } else {
        vec![(5, 2), (7, 2)]
    }
}

fn correlation_vanishing(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let grid = corr_moduli(ctx);
    for &(p, k) in &grid {
        let m = md(p, k);
        let kl3 = kl3_closed_table(&m)?;
        for g1 in units(&m) {
            for g2 in units(&m) {
                let params = CorrelationParams::new(0, g1 as i64, g2 as i64, m)?;
                if params.predicts_vanishing() {
                    let v = c_corr_with_table(&params, &kl3);
                    t.residual(v.norm(), VANISHING_TOL, || format!("C(0, {g1}, {g2}; {p}^{k})"));
                }
            }
        }
    }
    Ok(t.finish(
        "correlation-vanishing",
        "C(0, g1, g2) = 0 when g1 != g2 mod p^floor(k/2)",
        format!("(p,k) in {grid:?}, all unit pairs"),
        start,
    ))
}

fn correlation_bound(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let grid = corr_moduli(ctx);
    for &(p, k) in &grid {
        let m = md(p, k);
        let kl3 = kl3_closed_table(&m)?;
        for g1 in [1i64, 2] {
            for g2 in units(&m) {
                for shift in 0..m.q() as i64 {
                    let params = CorrelationParams::new(shift, g1, g2 as i64, m)?;
                    let v = c_corr_with_table(&params, &kl3).norm();
                    t.ratio(v, params.reference_bound(), DEFAULT_SLACK, || {
                        format!("C({shift}, {g1}, {g2}; {p}^{k})")
                    });
                }
            }
        }
    }
    Ok(t.finish(
        "correlation-bound",
        "|C(m, g1, g2)| << p^min(v(m), ceil(k/2))",
        format!("(p,k) in {grid:?}, g1 in {{1,2}}, all g2, all m"),
        start,
    ))
}

fn ca_identities(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut grid = vec![(5u64, 2u32), (7, 2)];
    if ctx.full() {
        grid.extend([(11, 2), (5, 3)]);
    }
    let pairs = [(1i64, 1i64), (1, 2), (2, 3)];
    for &(p, k) in &grid {
        let m = md(p, k);
        let kl3 = kl3_closed_table(&m)?;
        for shift in 0..m.q() as i64 {
            for &(l1, l2) in &pairs {
                for a in [1i64, 2] {
                    let f = c_a_fourier(shift, l1, l2, a, &m)?;
                    let r = c_a_reduced(shift, l1, l2, a, &m)?;
                    let params = CorrelationParams::new(shift, a * l1, a * l2, m)?;
                    let c = c_corr_with_table(&params, &kl3);
                    t.residual((f - r).norm(), IDENTITY_TOL, || {
                        format!("C_a fourier vs reduced: m={shift} l=({l1},{l2}) a={a} q={}", m.q())
                    });
                    t.residual((r - c).norm(), IDENTITY_TOL, || {
                        format!("C_a reduced vs C: m={shift} l=({l1},{l2}) a={a} q={}", m.q())
                    });
                }
            }
        }
    }
    Ok(t.finish(
        "ca-identities",
        "C_a Fourier form = reduced form = C(m, a l1, a l2)",
        format!("(p,k) in {grid:?}, all m, l in {pairs:?}, a in {{1,2}}"),
        start,
    ))
}

fn frakc_factorization(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let budget: u128 = if ctx.full() { 20_000_000 } else { 1_500_000 };
    let shapes = [(1u64, 1u64, 1u64), (1, 2, 1), (2, 2, 1), (2, 2, 2), (3, 1, 1), (2, 4, 2), (4, 2, 2)];
    let ms = [(1i64, 1i64), (1, 3)];
    for p in [5u64, 7] {
        for (k, lambda) in [(2u32, 1u32), (3, 2)] {
            for &(c1, c2, n1) in &shapes {
                for &(m1, m2) in &ms {
                    for (n2, sign) in [(0i64, Sign::Plus), (1, Sign::Plus), (1, Sign::Minus)] {
                        let Ok(params) = FrakCParams::new(n2, (m1, m2), (c1, c2), n1, p, lambda, k, 1) else {
                            continue;
                        };
                        let params = params.with_sign(sign);
                        if params.cost() > budget {
                            continue;
                        }
                        let whole = frak_c(&params)?;
                        let split = frak_c1(&params)? * frak_c2(&params)?;
                        let scale = whole.norm().max(1.0);
                        t.residual((whole - split).norm() / scale, IDENTITY_TOL, || {
                            format!("frak C vs C1*C2 at {params:?}: {whole:.6} vs {split:.6}")
                        });
                    }
                }
            }
        }
    }
    Ok(t.finish(
        "frakc-factorization",
        "frak C = frak C_1 * frak C_2 (relative residual)",
        format!("p in {{5,7}}, (k,lambda) in {{(2,1),(3,2)}}, (c1,c2,n1) in {shapes:?}, cost <= {budget}"),
        start,
    ))
}

fn frakc1_suite(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let top: u64 = if ctx.full() { 8 } else { 4 };
    for p in [5u64, 7] {
        for c1 in (1..=top).filter(|c| c % p != 0) {
            for c2 in (1..=top).filter(|c| c % p != 0) {
                for n1 in (1..=c1.gcd(&c2)).filter(|n| c1 % n == 0 && c2 % n == 0) {
                    for m1 in [1i64, 2, 3] {
                        for m2 in [1i64, 2, 5] {
                            for n2 in [0i64, 1, 2, 3, 6] {
                                let Ok(params) = FrakCParams::new(n2, (m1, m2), (c1, c2), n1, p, 2, 3, 1) else {
                                    continue;
                                };
                                let v = frak_c1(&params)?.norm();
                                if params.frak_c1_predicts_vanishing() {
                                    t.residual(v, VANISHING_TOL, || format!("frak C_1 at {params:?}"));
                                }
                                t.ratio(v, params.frak_c1_reference(), DEFAULT_SLACK, || {
                                    format!("frak C_1 at {params:?}")
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t.finish(
        "frakc1-vanishing-bound",
        "frak C_1(0) = 0 for c1 != c2; growth bound",
        format!("p in {{5,7}}, k=3, lambda=2, c1,c2 <= {top}, n1 | (c1,c2), n2 in {{0,1,2,3,6}}"),
        start,
    ))
}

fn frakc2_suite(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let primes: &[u64] = if ctx.full() { &[5, 7] } else { &[5] };
    let mut vanishing_cases = 0u64;
    for &p in primes {
        for c1 in 1..=4u64 {
            for c2 in 1..=4u64 {
                for n1 in [1u64, 2].into_iter().filter(|n| c1 % n == 0 && c2 % n == 0) {
                    for m1 in [1i64, 2, 3, 4, 6] {
                        for m2 in [1i64, 2, 3, 4, 6] {
                            for ell in [1i64, 2] {
                                for n2 in [0, 1, p as i64] {
                                    let Ok(params) = FrakCParams::new(n2, (m1, m2), (c1, c2), n1, p, 2, 3, ell)
                                    else {
                                        continue;
                                    };
                                    let v = frak_c2(&params)?.norm();
                                    if params.frak_c2_predicts_vanishing() {
                                        vanishing_cases += 1;
                                        t.residual(v, VANISHING_TOL, || format!("frak C_2 at {params:?}"));
                                    }
                                    t.ratio(v, params.frak_c2_reference(), DEFAULT_SLACK, || {
                                        format!("frak C_2 at {params:?}")
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t.finish(
        "frakc2-vanishing-bound",
        "frak C_2(0) = 0 off the quartic congruence; growth bound",
        format!(
            "p in {primes:?}, k=3, lambda=2, c <= 4, n1 in {{1,2}}, m in {{1,2,3,4,6}}, l in {{1,2}}; {vanishing_cases} vanishing cases"
        ),
        start,
    ))
}

fn kloosterman_crt(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let limit: u64 = if ctx.full() { 200 } else { 60 };
    let entries = [(1i64, 1i64), (2, 3), (0, 5), (7, 0), (-3, 4)];
    for c1 in 2..=limit {
        for c2 in 2..=limit / c1 {
            if c1.gcd(&c2) != 1 {
                continue;
            }
            let i1 = inv_mod(c1 % c2, c2).expect("coprime") as i64;
            let i2 = inv_mod(c2 % c1, c1).expect("coprime") as i64;
            for &(m, n) in &entries {
                let whole = kloosterman_s(m, n, c1 * c2)?;
                let split = kloosterman_s(m * i2, n * i2, c1)? * kloosterman_s(m * i1, n * i1, c2)?;
                t.residual((whole - split).norm(), IDENTITY_TOL, || {
                    format!("S({m},{n};{c1}*{c2}) vs split: {whole:.6} vs {split:.6}")
                });
            }
        }
    }
    Ok(t.finish(
        "kloosterman-crt",
        "S(m,n;c1c2) = S(m/c2, n/c2; c1) S(m/c1, n/c1; c2)",
        format!("coprime c1, c2 >= 2 with c1 c2 <= {limit}"),
        start,
    ))
}

fn beta_factorization(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let ks: &[u32] = if ctx.full() { &[2, 3] } else { &[2] };
    for p in [5u64, 7] {
        for &k in ks {
            for c in [1u64, 2, 3, 4] {
                for lambda in 1..k {
                    for m in 0..2 * c as i64 {
                        for u in [1i64, 2, 3] {
                            for ell in [1i64, 2] {
                                let r = beta_factorization_check(c, p, k, lambda, m, u, ell)?;
                                t.residual(r.residual, BETA_TOL, || {
                                    format!("beta sum c={c} p={p} k={k} lambda={lambda} m={m} u={u} l={ell}")
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t.finish(
        "beta-factorization",
        "beta-sum of Kl_4 factors through Kl_3",
        format!("p in {{5,7}}, k in {ks:?}, c <= 4, 1 <= lambda < k, m < 2c, u in {{1,2,3}}, l in {{1,2}}"),
        start,
    ))
}

fn ramanujan(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    let top: u64 = if ctx.full() { 120 } else { 40 };
    for q in 1..=top {
        for u in 0..q as i64 {
            let closed = ramanujan_sum(u, q)? as f64;
            let brute = ramanujan_sum_brute(u, q)?;
            t.residual((brute - Complex64::new(closed, 0.0)).norm(), IDENTITY_TOL, || format!("R_{q}({u})"));
            let g = (u as u64).gcd(&q) as f64;
            t.ratio(closed.abs(), g, 1.0, || format!("|R_{q}({u})| vs gcd"));
        }
    }
    Ok(t.finish("ramanujan", "Ramanujan sums: closed form and |R_q(u)| <= (u,q)", format!("q <= {top}, all u"), start))
}

fn tau_exact(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let top = if ctx.full() { 10_000 } else { 2_000 };
    let table = ctx.tau(top)?;
    let mut t = Tally::new();
    for n in 2..=top {
        let f = factorize(n as u64);
        let (p, e) = f[0];
        let pe = p.pow(e) as usize;
        if pe != n {
            let lhs = table.get(n)?;
            let rhs = table.get(pe)? * table.get(n / pe)?;
            t.check(lhs == rhs, || format!("tau({n}) = {lhs} != tau({pe}) tau({}) = {rhs}", n / pe));
        } else if e >= 2 {
            let prev = if e == 2 { 1 } else { table.get(pe / (p * p) as usize)? };
            let lhs = BigInt::from(table.get(pe)?);
            let rhs = BigInt::from(table.get(p as usize)?) * BigInt::from(table.get(pe / p as usize)?)
                - num_traits::pow(BigInt::from(p), 11) * BigInt::from(prev);
            t.check(lhs == rhs, || format!("Hecke recursion fails at {p}^{e}"));
        } else {
            let tp = BigInt::from(table.get(n)?);
            let bound = num_traits::pow(BigInt::from(n), 11) * 4;
            t.check(&tp * &tp <= bound, || format!("tau({n})^2 > 4 {n}^11"));
        }
    }
    Ok(t.finish(
        "tau-exact",
        "tau multiplicativity, Hecke recursion, tau(p)^2 <= 4p^11",
        format!("n <= {top}"),
        start,
    ))
}

fn sym2_convolution(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let top = if ctx.full() { 10_000 } else { 2_000 };
    let table = ctx.tau(top)?;
    let boxplus = one_boxplus_table(&sym2_table(table, top)?);
    let mut t = Tally::new();
    for n in 1..=top {
        let c = convolution_identity_check(table, &boxplus, n)?;
        t.check(c.holds(), || format!("lambda_f({n})^2 = {} but convolution gives {}", c.lhs, c.rhs));
    }
    Ok(t.finish(
        "sym2-convolution",
        "lambda_f(n)^2 = sum_{d^2 r = n} mu(d) lambda_{1+sym2}(r), exact",
        format!("n <= {top}"),
        start,
    ))
}

fn gl3(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let top = if ctx.full() { 1_000 } else { 300 };
    let table = ctx.tau(top)?;
    let sym2 = sym2_table(table, top)?;
    let mut gl3 = Gl3Coefficients::new(table);
    let mut t = Tally::new();
    for n in 1..=top {
        let a = gl3.coeff(1, n as u64)?;
        t.check(a == sym2[n], || format!("A(1,{n}) = {a} but sym2 convolution gives {}", sym2[n]));
    }
    for n1 in 1..=30u64 {
        for n2 in 1..=30u64 {
            let a = gl3.coeff(n1, n2)?;
            let b = gl3.coeff(n2, n1)?;
            t.check(a == b, || format!("A({n1},{n2}) != A({n2},{n1})"));
        }
    }
    Ok(t.finish(
        "gl3",
        "A(1,n) = sym2 coefficient; A(n1,n2) = A(n2,n1)",
        format!("n <= {top}; n1, n2 <= 30"),
        start,
    ))
}

fn rankin_selberg(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let sizes: &[u64] = if ctx.full() { &[100, 1_000, 10_000] } else { &[100, 1_000] };
    let top = *sizes.last().expect("nonempty") as usize;
    let table = ctx.tau(top)?;
    let mut t = Tally::new();
    for &n in sizes {
        let c = rankin_selberg_ratio(table, n)?;
        t.ratio(c, 1.0, DEFAULT_SLACK, || format!("sum_{{n1^2 n2 <= {n}}} |A|^2 / N"));
    }
    Ok(t.finish("rankin-selberg", "GL3 mean square <= C N", format!("N in {sizes:?}"), start))
}

fn poisson(_ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut t = Tally::new();
    for c in [1u64, 25, 49] {
        for beta in [0i64, 1, 3] {
            for sigma in [1.0, 5.0, 40.0] {
                let r = poisson_check(c, beta, sigma)?;
                t.residual(r.residual, POISSON_TOL, || format!("c={c} beta={beta} sigma={sigma}"));
            }
        }
    }
    Ok(t.finish(
        "poisson",
        "Poisson summation over a progression, Gaussian weight",
        "{1,25,49} x {0,1,3} x {1,5,40}".into(),
        start,
    ))
}

fn discrepancy(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let xs: &[f64] = if ctx.full() { &[1e3, 1e4, 1e5] } else { &[1e3, 1e4] };
    let table = ctx.tau(2 * 100_000)?;
    let mut t = Tally::new();
    let mut slopes = Vec::new();
    for p in [5u64, 7] {
        let m = md(p, 2);
        let a = discrepancy_scan(&m, xs, &BumpFunction::smooth(), table, DEFAULT_DELTA)?;
        let b = discrepancy_scan(&m, xs, &BumpFunction::smooth(), table, DEFAULT_DELTA)?;
        t.check(a.csv_string() == b.csv_string(), || format!("CSV differs between runs for q={}", m.q()));
        for &(x, s) in &a.telescoping {
            t.residual(s.abs(), 1e-10 * x, || format!("sum_a E(X={x}, q={})", m.q()));
        }
        if let Some(s) = a.slope {
            slopes.push((m.q(), s));
            t.check(s <= 1.0, || format!("log-log slope {s:.3} > 1 for q={}", m.q()));
        }
    }
    Ok(t.finish(
        "discrepancy",
        "sum_a E = 0, byte-stable CSV, slope <= 1",
        format!("q in {{25,49}}, X in {xs:?}; slopes {slopes:.3?}"),
        start,
    ))
}

fn twisted(ctx: &mut Context) -> Result<SuiteReport> {
    let start = Instant::now();
    let sizes: &[f64] = if ctx.full() { &[10.0, 100.0, 500.0, 2000.0] } else { &[10.0, 100.0, 500.0] };
    let table = ctx.tau(4_000)?;
    let mut t = Tally::new();
    for p in [5u64, 7] {
        let m = md(p, 2);
        for &n in sizes {
            for ell in [p as i64, 2 * p as i64] {
                let s = twisted_sum(n, ell, &m, &BumpFunction::smooth(), table)?;
                t.check(s.value == Complex64::new(0.0, 0.0), || format!("S({n}) with l={ell}, q={} is {}", m.q(), s.value));
            }
            for ell in [1i64, 2] {
                let s = twisted_sum(n, ell, &m, &BumpFunction::smooth(), table)?;
                t.ratio(s.value.norm(), s.reference, DEFAULT_SLACK, || format!("S({n}) with l={ell}, q={}", m.q()));
            }
        }
    }
    Ok(t.finish(
        "twisted-sum",
        "S(N) = 0 exactly for p | l; growth reference otherwise",
        format!("q in {{25,49}}, N in {sizes:?}"),
        start,
    ))
}
