//! Correlation and character sums built from `Kl_3`, `Kl_4` and classical
//! Kloosterman sums, together with the congruence predicates that say when
//! they vanish and the reference magnitudes that bound them.
//!
//! Every evaluator here is a literal brute-force sum. Inner `Kl_3` values
//! come from the closed form; all congruences are tested on integers.

use num_complex::Complex64;
use num_integer::Integer;

use crate::closed::{kl3_closed_table, kl4_table_via_kl3};
use crate::error::{Error, Result};
use crate::expsum::{kloosterman_s, units_and_inverses, PhaseTable, RationalPhase};
use crate::residue::{inv_mod, is_prime, mul_mod, reduce, valuation, PrimePowerModulus};
use crate::sum::ComplexSum;

/// Default slack applied to `<<` bounds whose implied constants are unknown.
pub const DEFAULT_SLACK: f64 = 10.0;

const COST_BUDGET: u128 = 100_000_000;

fn require_closed_form_modulus(m: &PrimePowerModulus) -> Result<()> {
    if m.p() == 3 {
        return Err(Error::Unsupported("correlation sums need p != 3".into()));
    }
    if m.k() < 2 {
        return Err(Error::Unsupported("correlation sums need k >= 2".into()));
    }
    Ok(())
}

fn unit_mod_p(x: i64, m: &PrimePowerModulus, name: &str) -> Result<u64> {
    let v = reduce(x, m.q());
    if !m.is_unit(v) {
        return Err(Error::Domain(format!("{name} = {x} must be a unit mod {}", m.p())));
    }
    Ok(v)
}

/// Parameters of `C(m, gamma1, gamma2; p^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationParams {
    pub m: i64,
    pub gamma1: u64,
    pub gamma2: u64,
    pub modulus: PrimePowerModulus,
}

impl CorrelationParams {
    pub fn new(m: i64, gamma1: i64, gamma2: i64, modulus: PrimePowerModulus) -> Result<Self> {
        require_closed_form_modulus(&modulus)?;
        Ok(Self {
            m,
            gamma1: unit_mod_p(gamma1, &modulus, "gamma1")?,
            gamma2: unit_mod_p(gamma2, &modulus, "gamma2")?,
            modulus,
        })
    }

    fn m_is_zero(&self) -> bool {
        reduce(self.m, self.modulus.q()) == 0
    }

    /// `m = 0` and `gamma1 != gamma2 mod p^floor(k/2)`: the sum must vanish.
    pub fn predicts_vanishing(&self) -> bool {
        let md = self.modulus.p_pow(self.modulus.k() / 2);
        self.m_is_zero() && self.gamma1 % md != self.gamma2 % md
    }

    /// `p^ceil(k/2)` for `m = 0`, otherwise `p^min(v_p(m), ceil(k/2))`.
    pub fn reference_bound(&self) -> f64 {
        let half_up = self.modulus.k().div_ceil(2);
        let e = if self.m_is_zero() {
            half_up
        } else {
            valuation(self.m, self.modulus.p()).min_with(half_up)
        };
        (self.modulus.p() as f64).powi(e as i32)
    }
}

/// `C(m, g1, g2; p^k) = p^{-k/2} sum* Kl_3(x1) conj(Kl_3(x2))` over unit pairs
/// with `g1/x1 - g2/x2 + m = 0 mod p^k`.
pub fn c_corr(params: &CorrelationParams) -> Result<Complex64> {
    let m = &params.modulus;
    let kl3 = kl3_closed_table(m)?;
    Ok(c_corr_with_table(params, &kl3))
}

pub(crate) fn c_corr_with_table(params: &CorrelationParams, kl3: &[Complex64]) -> Complex64 {
    let md = &params.modulus;
    let q = md.q();
    let (units, inv) = units_and_inverses(q);
    let shift = reduce(params.m, q);
    let g2_inv = inv_mod(params.gamma2, q).expect("unit");
    let mut acc = ComplexSum::new();
    for &x1 in &units {
        // 1/x2 = (g1/x1 + m) / g2
        let t = (mul_mod(params.gamma1, inv[x1 as usize], q) + shift) % q;
        if !md.is_unit(t) {
            continue;
        }
        let x2 = inv[mul_mod(g2_inv, t, q) as usize];
        acc.add(kl3[x1 as usize] * kl3[x2 as usize].conj());
    }
    acc.value() / (q as f64).sqrt()
}

/// Shared validation for the two `C_a` evaluators.
fn ca_setup(l1: i64, l2: i64, a: i64, m: &PrimePowerModulus) -> Result<(u64, u64)> {
    require_closed_form_modulus(m)?;
    let q = m.q();
    let a = unit_mod_p(a, m, "a")?;
    let l1 = unit_mod_p(l1, m, "l1")?;
    let l2 = unit_mod_p(l2, m, "l2")?;
    Ok((mul_mod(a, l1, q), mul_mod(a, l2, q)))
}

/// `C_a(m, l1, l2; q) = q^{-1/2} sum_{gamma mod q} Kl_4(a l1 gamma) conj(Kl_4(a l2 gamma)) e(gamma m / q)`.
pub fn c_a_fourier(m: i64, l1: i64, l2: i64, a: i64, md: &PrimePowerModulus) -> Result<Complex64> {
    let (g1, g2) = ca_setup(l1, l2, a, md)?;
    let q = md.q();
    if (q as u128) * (q as u128) > COST_BUDGET {
        return Err(Error::Resource(format!("C_a by Fourier route mod {q} needs q^2 work")));
    }
    let kl4 = kl4_table_via_kl3(md)?;
    let phases = PhaseTable::new(q)?;
    let shift = reduce(m, q);
    let acc: ComplexSum = (0..q)
        .map(|gamma| {
            kl4[mul_mod(g1, gamma, q) as usize]
                * kl4[mul_mod(g2, gamma, q) as usize].conj()
                * phases.at(mul_mod(gamma, shift, q))
        })
        .collect();
    Ok(acc.value() / (q as f64).sqrt())
}

/// `C_a` after opening `Kl_4` and executing the `gamma` sum:
/// `q^{-1/2} sum* Kl_3(1/x) conj(Kl_3(1/y))` over `a l1 x - a l2 y + m = 0`.
pub fn c_a_reduced(m: i64, l1: i64, l2: i64, a: i64, md: &PrimePowerModulus) -> Result<Complex64> {
    let (g1, g2) = ca_setup(l1, l2, a, md)?;
    let q = md.q();
    let kl3 = kl3_closed_table(md)?;
    let (units, inv) = units_and_inverses(q);
    let g2_inv = inv_mod(g2, q).expect("unit");
    let shift = reduce(m, q);
    let mut acc = ComplexSum::new();
    for &x in &units {
        let y = mul_mod((mul_mod(g1, x, q) + shift) % q, g2_inv, q);
        if !md.is_unit(y) {
            continue;
        }
        acc.add(kl3[inv[x as usize] as usize] * kl3[inv[y as usize] as usize].conj());
    }
    Ok(acc.value() / (q as f64).sqrt())
}

/// Sign choice in the second entry of the `p^lambda`-part Kloosterman sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, x: i64) -> i64 {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

/// Parameters of the character sums `frak C`, `frak C_1`, `frak C_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrakCParams {
    pub n2: i64,
    pub m1: i64,
    pub m2: i64,
    pub c1: u64,
    pub c2: u64,
    pub n1: u64,
    pub p: u64,
    pub lambda: u32,
    pub k: u32,
    pub ell: i64,
    pub sign: Sign,
    hat_c1: u64,
    hat_c2: u64,
}

impl FrakCParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n2: i64,
        (m1, m2): (i64, i64),
        (c1, c2): (u64, u64),
        n1: u64,
        p: u64,
        lambda: u32,
        k: u32,
        ell: i64,
    ) -> Result<Self> {
        if !is_prime(p) || p == 3 {
            return Err(Error::Unsupported(format!("p = {p} must be a prime other than 3")));
        }
        if lambda == 0 || 3 * lambda > 2 * k {
            return Err(Error::Unsupported(format!(
                "need 1 <= lambda <= 2k/3, got lambda = {lambda}, k = {k}"
            )));
        }
        PrimePowerModulus::new(p, k)?;
        if c1 == 0 || c2 == 0 || n1 == 0 {
            return Err(Error::Domain("c1, c2, n1 must be positive".into()));
        }
        if c1 % p == 0 || c2 % p == 0 {
            return Err(Error::Domain(format!("c1, c2 must be coprime to p = {p}")));
        }
        if c1 % n1 != 0 || c2 % n1 != 0 {
            return Err(Error::Domain(format!("n1 = {n1} must divide c1 = {c1} and c2 = {c2}")));
        }
        if (m1.unsigned_abs()).gcd(&c1) != 1 || (m2.unsigned_abs()).gcd(&c2) != 1 {
            return Err(Error::Domain("need gcd(m1, c1) = gcd(m2, c2) = 1".into()));
        }
        if reduce(ell, p) == 0 {
            return Err(Error::Domain(format!("ell = {ell} must be a unit mod {p}")));
        }
        Ok(Self {
            n2,
            m1,
            m2,
            c1,
            c2,
            n1,
            p,
            lambda,
            k,
            ell,
            sign: Sign::Plus,
            hat_c1: c1 / n1,
            hat_c2: c2 / n1,
        })
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_n2(mut self, n2: i64) -> Self {
        self.n2 = n2;
        self
    }

    pub fn hat_c1(&self) -> u64 {
        self.hat_c1
    }

    pub fn hat_c2(&self) -> u64 {
        self.hat_c2
    }

    fn modulus(&self) -> PrimePowerModulus {
        PrimePowerModulus::new(self.p, self.k).expect("validated")
    }

    fn p_lambda(&self) -> u64 {
        self.p.pow(self.lambda)
    }

    /// Rough operation count of the full `frak C` evaluation.
    pub fn cost(&self) -> u128 {
        let pl = self.p_lambda() as u128;
        let beta = (self.hat_c1 * self.hat_c2) as u128 * pl;
        let inner = |c: u64, hat: u64| c as u128 * pl * hat as u128 * pl;
        beta * (inner(self.c1, self.hat_c1) + inner(self.c2, self.hat_c2))
    }

    /// `n2 = 0` and `c1 != c2`.
    pub fn frak_c1_predicts_vanishing(&self) -> bool {
        self.n2 == 0 && self.c1 != self.c2
    }

    /// `n2 = 0` and `m1^4 c2 hat_c2^6 != m2^4 c1 hat_c1^6 mod p^floor(lambda/2)`.
    pub fn frak_c2_predicts_vanishing(&self) -> bool {
        if self.n2 != 0 {
            return false;
        }
        let md = self.p.pow(self.lambda / 2);
        let side = |m: i64, c: u64, hat: u64| -> u64 {
            let m = reduce(m, md);
            let m4 = mul_mod(mul_mod(m, m, md), mul_mod(m, m, md), md);
            let h2 = mul_mod(hat % md, hat % md, md);
            let h6 = mul_mod(mul_mod(h2, h2, md), h2, md);
            mul_mod(mul_mod(m4, c % md, md), h6, md)
        };
        side(self.m1, self.c2, self.hat_c2) != side(self.m2, self.c1, self.hat_c1)
    }

    /// Reference magnitude for `frak C_1(n2)`: `hat_c^2 gcd(hat_c, m1 - m2)` at
    /// `n2 = 0, c1 = c2`, else `hat_c1 hat_c2 gcd(hat_c1, hat_c2, n2)`.
    pub fn frak_c1_reference(&self) -> f64 {
        if self.n2 == 0 && self.c1 == self.c2 {
            let h = self.hat_c1;
            let g = h.gcd(&(self.m1 - self.m2).unsigned_abs());
            (h * h * g) as f64
        } else {
            let g = self.hat_c1.gcd(&self.hat_c2).gcd(&self.n2.unsigned_abs());
            (self.hat_c1 * self.hat_c2 * g) as f64
        }
    }

    /// Reference magnitude for `frak C_2(n2)`: `p^{3 lambda}` at `n2 = 0`,
    /// else `p^{ceil(5 lambda / 2) + min(v_p(n2), ceil(lambda / 2))}`.
    pub fn frak_c2_reference(&self) -> f64 {
        let p = self.p as f64;
        if self.n2 == 0 {
            p.powi(3 * self.lambda as i32)
        } else {
            let e = (5 * self.lambda).div_ceil(2)
                + valuation(self.n2, self.p).min_with(self.lambda.div_ceil(2));
            p.powi(e as i32)
        }
    }
}

/// Which of the two `(m, c)` pairs an inner sum is built from.
#[derive(Clone, Copy)]
enum Side {
    First,
    Second,
}

impl FrakCParams {
    fn side(&self, side: Side) -> (i64, u64, u64) {
        match side {
            Side::First => (self.m1, self.c1, self.hat_c1),
            Side::Second => (self.m2, self.c2, self.hat_c2),
        }
    }
}

/// `Kl_3(c l / (m + u p^{k-lambda}); q)`, zero when the denominator is not a unit.
fn kl3_shifted(params: &FrakCParams, kl3: &[Complex64], m: i64, c: u64, u: u64) -> Complex64 {
    let md = params.modulus();
    let q = md.q();
    let shift = params.p.pow(params.k - params.lambda);
    let denom = (reduce(m, q) + mul_mod(u % q, shift, q)) % q;
    if !md.is_unit(denom) {
        return Complex64::new(0.0, 0.0);
    }
    let num = mul_mod(c % q, reduce(params.ell, q), q);
    kl3[mul_mod(num, inv_mod(denom, q).expect("unit"), q) as usize]
}

/// Inner sum over `u mod c p^lambda`:
/// `sum*_{m = -u p^{k-lambda} mod c} Kl_3(c l / (m + u p^{k-lambda})) S(1/u, +-beta; c p^lambda / n1)`.
fn local_sum(params: &FrakCParams, kl3: &[Complex64], side: Side, beta: i64) -> Complex64 {
    let (m, c, _) = params.side(side);
    let pl = params.p_lambda();
    let big = c * pl;
    let ks_mod = big / params.n1;
    let shift = params.p.pow(params.k - params.lambda);
    let mut acc = ComplexSum::new();
    for u in 0..big {
        let Some(u_inv) = inv_mod(u, big) else { continue };
        if (reduce(m, c) + mul_mod(u % c, shift % c, c)) % c != 0 {
            continue;
        }
        let k3 = kl3_shifted(params, kl3, m, c, u);
        if k3 == Complex64::new(0.0, 0.0) {
            continue;
        }
        let s = kloosterman_s(u_inv as i64, params.sign.apply(beta), ks_mod).expect("modulus >= 1");
        acc.add(k3 * s);
    }
    acc.value()
}

/// `frak C(n2) = sum_{beta mod hat_c1 hat_c2 p^lambda} C(m1,c1,n1,beta) conj(C(m2,c2,n1,beta)) e(n2 beta / (hat_c1 hat_c2 p^lambda))`.
pub fn frak_c(params: &FrakCParams) -> Result<Complex64> {
    if params.cost() > COST_BUDGET {
        return Err(Error::Resource(format!(
            "frak C needs ~{} operations (budget {COST_BUDGET})",
            params.cost()
        )));
    }
    let kl3 = kl3_closed_table(&params.modulus())?;
    let modulus = params.hat_c1 * params.hat_c2 * params.p_lambda();
    let phases = PhaseTable::new(modulus)?;
    let acc: ComplexSum = (0..modulus)
        .map(|beta| {
            let a = local_sum(params, &kl3, Side::First, beta as i64);
            let b = local_sum(params, &kl3, Side::Second, beta as i64);
            a * b.conj() * phases.at_signed(params.n2.wrapping_mul(beta as i64) % modulus as i64)
        })
        .collect();
    Ok(acc.value())
}

/// Inverse of `x` mod `m`, with the convention `0` when `m = 1`.
fn inv_or_zero(x: i64, m: u64) -> u64 {
    inv_mod(reduce(x, m), m).expect("coprime by construction")
}

/// The prime-to-`p` factor:
/// `sum_{beta mod hat_c1 hat_c2} S(-p^{k-lambda}/(m1 p^lambda), +-beta/p^lambda; hat_c1) S(..; hat_c2) e(n2 beta / (p^lambda hat_c1 hat_c2))`.
pub fn frak_c1(params: &FrakCParams) -> Result<Complex64> {
    let pl = params.p_lambda();
    let shift = params.p.pow(params.k - params.lambda);
    let modulus = params.hat_c1 * params.hat_c2;
    let first_entry = |m: i64, hat: u64| -> i64 {
        let v = mul_mod(mul_mod(inv_or_zero(m, hat), shift % hat, hat), inv_or_zero(pl as i64, hat), hat);
        -(v as i64)
    };
    let a1 = first_entry(params.m1, params.hat_c1);
    let a2 = first_entry(params.m2, params.hat_c2);
    let pl_inv_1 = inv_or_zero(pl as i64, params.hat_c1) as i64;
    let pl_inv_2 = inv_or_zero(pl as i64, params.hat_c2) as i64;
    let pl_inv = inv_or_zero(pl as i64, modulus);
    let acc: ComplexSum = (0..modulus)
        .map(|beta| {
            let b = params.sign.apply(beta as i64);
            let s1 = kloosterman_s(a1, b * pl_inv_1, params.hat_c1).expect("modulus >= 1");
            let s2 = kloosterman_s(a2, b * pl_inv_2, params.hat_c2).expect("modulus >= 1");
            let ph = mul_mod(mul_mod(reduce(params.n2, modulus), pl_inv, modulus), beta, modulus);
            s1 * s2 * RationalPhase::new(ph as i64, modulus).expect("modulus >= 1").value()
        })
        .collect();
    Ok(acc.value())
}

/// The `p`-part: `sum_{beta mod p^lambda} B_1(beta) conj(B_2(beta)) e(beta n2 / (hat_c1 hat_c2 p^lambda))`
/// with `B_i(beta) = sum*_{u mod p^lambda} Kl_3(c_i l / (m_i + u p^{k-lambda})) S(1/(u hat_c_i), +-beta/hat_c_i; p^lambda)`.
pub fn frak_c2(params: &FrakCParams) -> Result<Complex64> {
    let pl = params.p_lambda();
    let cost = (pl as u128).pow(3) * 2;
    if cost > COST_BUDGET {
        return Err(Error::Resource(format!("frak C_2 needs ~{cost} operations")));
    }
    let kl3 = kl3_closed_table(&params.modulus())?;
    let part = |side: Side, beta: u64| -> Complex64 {
        let (m, c, hat) = params.side(side);
        let hat_inv = inv_or_zero(hat as i64, pl);
        let b = params.sign.apply(mul_mod(beta, hat_inv, pl) as i64);
        let mut acc = ComplexSum::new();
        for u in (1..pl).filter(|u| u % params.p != 0) {
            let k3 = kl3_shifted(params, &kl3, m, c, u);
            if k3 == Complex64::new(0.0, 0.0) {
                continue;
            }
            let first = mul_mod(inv_or_zero(u as i64, pl), hat_inv, pl) as i64;
            acc.add(k3 * kloosterman_s(first, b, pl).expect("modulus >= 1"));
        }
        acc.value()
    };
    let twist = mul_mod(
        inv_or_zero((params.hat_c1 * params.hat_c2) as i64, pl),
        reduce(params.n2, pl),
        pl,
    );
    let phases = PhaseTable::new(pl)?;
    let acc: ComplexSum = (0..pl)
        .map(|beta| part(Side::First, beta) * part(Side::Second, beta).conj() * phases.at(mul_mod(twist, beta, pl)))
        .collect();
    Ok(acc.value())
}
