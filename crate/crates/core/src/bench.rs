//! Wall-clock comparison of the closed-form `Kl_3` against brute force.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::closed::kl3_closed;
use crate::error::{Error, Result};
use crate::expsum::hyper_kloosterman_brute_with_budget;
use crate::residue::{PrimePowerModulus, UnitResidue};

/// Brute force is timed only when `q^2` is at most this.
pub const BRUTE_BENCH_BUDGET: u64 = 200_000_000;

/// At most this many samples are timed by brute force.
pub const BRUTE_BENCH_SAMPLES: usize = 5;

pub const DEFAULT_SEED: u64 = 0x6b6c_3362;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub p: u64,
    pub k: u32,
    pub q: u64,
    pub samples: usize,
    pub closed_per_call: Duration,
    pub brute_samples: usize,
    pub brute_per_call: Option<Duration>,
    /// Largest `|closed - brute|` over the brute-force samples.
    pub max_discrepancy: Option<f64>,
}

impl BenchReport {
    pub fn speedup(&self) -> Option<f64> {
        self.brute_per_call
            .map(|b| b.as_secs_f64() / self.closed_per_call.as_secs_f64().max(1e-12))
    }
}

/// Seeded units mod `q`.
pub fn sample_units(m: &PrimePowerModulus, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.gen_range(1..m.q());
        if m.is_unit(a) {
            out.push(a);
        }
    }
    out
}

pub fn bench_kl3(p: u64, k: u32, samples: usize, seed: u64) -> Result<BenchReport> {
    let m = PrimePowerModulus::new(p, k)?;
    if p == 3 || k < 2 {
        return Err(Error::Unsupported(format!("closed form needs p != 3 and k >= 2, got p = {p}, k = {k}")));
    }
    if samples == 0 {
        return Err(Error::Domain("samples must be positive".into()));
    }
    let q = m.q();
    let units = sample_units(&m, samples, seed);

    let start = Instant::now();
    for &a in &units {
        black_box(kl3_closed(black_box(a as i64), &m)?);
    }
    let closed_per_call = start.elapsed() / samples as u32;

    let brute_ok = (q as u128) * (q as u128) <= BRUTE_BENCH_BUDGET as u128;
    let (brute_samples, brute_per_call, max_discrepancy) = if brute_ok {
        let n = samples.min(BRUTE_BENCH_SAMPLES);
        let mut worst: f64 = 0.0;
        let mut spent = Duration::ZERO;
        for &a in &units[..n] {
            let arg = UnitResidue::new(a as i64, q)?;
            let t = Instant::now();
            let brute = black_box(hyper_kloosterman_brute_with_budget(3, &arg, q, BRUTE_BENCH_BUDGET)?);
            spent += t.elapsed();
            worst = worst.max((brute - kl3_closed(a as i64, &m)?).norm());
        }
        (n, Some(spent / n as u32), Some(worst))
    } else {
        (0, None, None)
    };
    Ok(BenchReport { p, k, q, samples, closed_per_call, brute_samples, brute_per_call, max_discrepancy })
}
