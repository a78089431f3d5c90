//! `hyperkl` command-line front-end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperkl_core::bench::{bench_kl3, DEFAULT_SEED};
use hyperkl_core::closed::{kl3_closed, kl4_via_kl3};
use hyperkl_core::corr::{
    c_a_fourier, c_a_reduced, c_corr, frak_c, frak_c1, frak_c2, CorrelationParams, FrakCParams, Sign,
};
use hyperkl_core::expsum::hyper_kloosterman_brute;
use hyperkl_core::harness::{
    discrepancy_scan, fmt_g17, poisson_check, required_table_len, twisted_sum, BumpFunction, DEFAULT_DELTA,
};
use hyperkl_core::hecke::{one_boxplus_table, sym2_table, tau_table, tau_table_cached, CoefficientTable};
use hyperkl_core::residue::{PrimePowerModulus, UnitResidue};
use hyperkl_core::verify::{verify, Fault, Profile};
use hyperkl_core::{Complex64, Error};

/// Environment variable naming the cache directory.
const CACHE_ENV: &str = "HYPERKL_CACHE_DIR";
const DEFAULT_CACHE_DIR: &str = "./.cache";

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "hyperkl", version, about = "Hyper-Kloosterman sums modulo prime powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Kl_d(a; p^k).
    Kl(KlArgs),
    /// Evaluate a correlation or character sum.
    Charsum(CharsumArgs),
    /// Print Hecke coefficient tables.
    Hecke(HeckeArgs),
    /// Progression discrepancy scan over every unit residue.
    Discrepancy(DiscrepancyArgs),
    /// Twisted sum of A(1, m) Kl_4(m l; q).
    Twisted(TwistedArgs),
    /// Poisson summation check with a Gaussian weight.
    Poisson(PoissonArgs),
    /// Time the closed-form Kl_3 against brute force.
    Bench(BenchArgs),
    /// Run the verification sweeps.
    Verify(VerifyArgs),
}

fn int<T: TryFrom<i128>>(s: &str) -> Result<T, String> {
    let v: i128 = match s.parse::<i128>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
            if !f.is_finite() || f.fract() != 0.0 || f.abs() > 9.0e18 {
                return Err(format!("'{s}' is not an integer"));
            }
            f as i128
        }
    };
    T::try_from(v).map_err(|_| format!("'{s}' is out of range"))
}

fn real(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{s}' is not a finite number"))
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Closed,
}

#[derive(Args)]
struct KlArgs {
    #[arg(long, value_parser = int::<u32>)]
    d: u32,
    #[arg(long, value_parser = int::<u64>)]
    p: u64,
    #[arg(long, value_parser = int::<u32>)]
    k: u32,
    #[arg(long, value_parser = int::<i64>, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, value_enum, default_value = "brute")]
    method: Method,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    C,
    Ca,
    Frakc,
    Frakc1,
    Frakc2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Args)]
struct CharsumArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, value_parser = int::<u64>)]
    p: u64,
    #[arg(long, value_parser = int::<u32>)]
    k: u32,
    /// Shift for c and ca.
    #[arg(long, value_parser = int::<i64>, default_value = "0", allow_negative_numbers = true)]
    m: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    gamma1: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    gamma2: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    l1: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    l2: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    a: i64,
    /// Evaluate ca through the Kl_4 Fourier form instead of the reduced form.
    #[arg(long)]
    fourier: bool,
    #[arg(long, value_parser = int::<i64>, default_value = "0", allow_negative_numbers = true)]
    n2: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1", allow_negative_numbers = true)]
    m1: i64,
    #[arg(long, value_parser = int::<i64>, default_value = "1", allow_negative_numbers = true)]
    m2: i64,
    #[arg(long, value_parser = int::<u64>, default_value = "1")]
    c1: u64,
    #[arg(long, value_parser = int::<u64>, default_value = "1")]
    c2: u64,
    #[arg(long, value_parser = int::<u64>, default_value = "1")]
    n1: u64,
    #[arg(long, value_parser = int::<u32>, default_value = "1")]
    lambda: u32,
    #[arg(long, value_parser = int::<i64>, default_value = "1")]
    ell: i64,
    #[arg(long, value_enum, default_value = "plus")]
    sign: SignArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Tau,
    Sym2,
    Boxplus,
}

#[derive(Args)]
struct HeckeArgs {
    #[arg(long, value_enum)]
    table: TableKind,
    #[arg(long, value_parser = int::<usize>)]
    n: usize,
    /// Read coefficients from a file in the ingestion format instead of computing tau.
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BumpArg {
    Smooth,
    Sharp,
}

#[derive(Args)]
struct DiscrepancyArgs {
    #[arg(long, value_parser = int::<u64>)]
    p: u64,
    #[arg(long, value_parser = int::<u32>)]
    k: u32,
    /// Cutoffs, repeated or comma-separated.
    #[arg(long, value_parser = real, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = real, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, value_enum, default_value = "smooth")]
    bump: BumpArg,
    #[arg(long)]
    coeffs: Option<PathBuf>,
}

#[derive(Args)]
struct TwistedArgs {
    #[arg(long, value_parser = real)]
    n: f64,
    #[arg(long, value_parser = int::<i64>, allow_negative_numbers = true)]
    ell: i64,
    #[arg(long, value_parser = int::<u64>)]
    p: u64,
    #[arg(long, value_parser = int::<u32>)]
    k: u32,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(long, value_parser = int::<u64>)]
    c: u64,
    #[arg(long, value_parser = int::<i64>, allow_negative_numbers = true)]
    beta: i64,
    #[arg(long, value_parser = real)]
    sigma: f64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = int::<u64>, default_value = "101")]
    p: u64,
    #[arg(long, value_parser = int::<u32>, default_value = "2")]
    k: u32,
    #[arg(long, value_parser = int::<usize>, default_value = "1000")]
    samples: usize,
    #[arg(long, value_parser = int::<u64>, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    profile: ProfileArg,
    /// Deliberately break a component to check that the sweeps notice.
    #[arg(long, hide = true, default_value = "none")]
    inject_fault: String,
}

enum Failure {
    Core(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Kl(a) => run_kl(a),
        Command::Charsum(a) => run_charsum(a),
        Command::Hecke(a) => run_hecke(a),
        Command::Discrepancy(a) => run_discrepancy(a),
        Command::Twisted(a) => run_twisted(a),
        Command::Poisson(a) => run_poisson(a),
        Command::Bench(a) => run_bench(a),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Resource(_) | Error::Io(_) => EXIT_RESOURCE,
                _ => EXIT_USAGE,
            })
        }
    }
}

fn complex(z: Complex64) -> String {
    format!("{} {} {}i", fmt_g17(z.re), if z.im < 0.0 { '-' } else { '+' }, fmt_g17(z.im.abs()))
}

fn run_kl(a: KlArgs) -> CliResult {
    let m = PrimePowerModulus::new(a.p, a.k)?;
    let v = match (a.method, a.d) {
        (Method::Brute, d) => hyper_kloosterman_brute(d, &UnitResidue::new(a.a, m.q())?, m.q())?,
        (Method::Closed, 3) => kl3_closed(a.a, &m)?,
        (Method::Closed, 4) => kl4_via_kl3(a.a, &m)?,
        (Method::Closed, d) => {
            return Err(Error::Unsupported(format!("no closed form for d = {d}; use --method brute")).into())
        }
    };
    println!("Kl_{}({}; {}^{}) = {}", a.d, a.a, a.p, a.k, complex(v));
    println!("abs = {}", fmt_g17(v.norm()));
    Ok(())
}

fn run_charsum(a: CharsumArgs) -> CliResult {
    let m = PrimePowerModulus::new(a.p, a.k)?;
    let frak = || -> Result<FrakCParams, Error> {
        let sign = match a.sign {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        };
        Ok(FrakCParams::new(a.n2, (a.m1, a.m2), (a.c1, a.c2), a.n1, a.p, a.lambda, a.k, a.ell)?.with_sign(sign))
    };
    match a.family {
        Family::C => {
            let params = CorrelationParams::new(a.m, a.gamma1, a.gamma2, m)?;
            let v = c_corr(&params)?;
            println!("C = {}", complex(v));
            println!("predicts_vanishing = {}", params.predicts_vanishing());
            println!("reference = {}", fmt_g17(params.reference_bound()));
        }
        Family::Ca => {
            let v = if a.fourier {
                c_a_fourier(a.m, a.l1, a.l2, a.a, &m)?
            } else {
                c_a_reduced(a.m, a.l1, a.l2, a.a, &m)?
            };
            println!("C_a = {}", complex(v));
        }
        Family::Frakc => println!("frakC = {}", complex(frak_c(&frak()?)?)),
        Family::Frakc1 => {
            let params = frak()?;
            println!("frakC1 = {}", complex(frak_c1(&params)?));
            println!("predicts_vanishing = {}", params.frak_c1_predicts_vanishing());
            println!("reference = {}", fmt_g17(params.frak_c1_reference()));
        }
        Family::Frakc2 => {
            let params = frak()?;
            println!("frakC2 = {}", complex(frak_c2(&params)?));
            println!("predicts_vanishing = {}", params.frak_c2_predicts_vanishing());
            println!("reference = {}", fmt_g17(params.frak_c2_reference()));
        }
    }
    Ok(())
}

fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

fn coefficients(n: usize, file: Option<&PathBuf>) -> Result<CoefficientTable, Error> {
    if let Some(path) = file {
        let table = CoefficientTable::read_from(fs::File::open(path)?)?;
        if table.len() < n {
            return Err(Error::Resource(format!("{} holds {} coefficients, need {n}", path.display(), table.len())));
        }
        return Ok(table);
    }
    match tau_table_cached(n, &cache_dir()) {
        Ok(t) => Ok(t),
        Err(Error::Io(msg)) => {
            eprintln!("warning: tau cache unavailable ({msg}); computing in memory");
            tau_table(n)
        }
        Err(e) => Err(e),
    }
}

fn run_hecke(a: HeckeArgs) -> CliResult {
    let table = coefficients(a.n, a.coeffs.as_ref())?;
    let out = std::io::stdout();
    let mut out = std::io::BufWriter::new(out.lock());
    match a.table {
        TableKind::Tau => {
            for n in 1..=a.n {
                writeln!(out, "{n}\t{}", table.get(n)?)?;
            }
        }
        TableKind::Sym2 => {
            for (n, v) in sym2_table(&table, a.n)?.iter().enumerate().skip(1) {
                writeln!(out, "{n}\t{v}")?;
            }
        }
        TableKind::Boxplus => {
            for (n, v) in one_boxplus_table(&sym2_table(&table, a.n)?).iter().enumerate().skip(1) {
                writeln!(out, "{n}\t{v}")?;
            }
        }
    }
    Ok(())
}

fn run_discrepancy(a: DiscrepancyArgs) -> CliResult {
    let m = PrimePowerModulus::new(a.p, a.k)?;
    let need = a.x.iter().map(|&x| required_table_len(x)).max().unwrap_or(1);
    let table = coefficients(need, a.coeffs.as_ref())?;
    let bump = match a.bump {
        BumpArg::Smooth => BumpFunction::smooth(),
        BumpArg::Sharp => BumpFunction::sharp_cut(),
    };
    let report = discrepancy_scan(&m, &a.x, &bump, &table, a.delta)?;
    match &a.out {
        Some(path) => fs::write(path, report.csv_string())?,
        None => print!("{}", report.csv_string()),
    }
    let mut summary: Box<dyn Write> = if a.out.is_some() { Box::new(std::io::stdout()) } else { Box::new(std::io::stderr()) };
    for ((x, max), (_, tele)) in report.max_abs.iter().zip(&report.telescoping) {
        writeln!(summary, "X={} max_abs_E={} sum_E={}", fmt_g17(*x), fmt_g17(*max), fmt_g17(*tele))?;
    }
    match report.slope {
        Some(s) => writeln!(summary, "slope={}", fmt_g17(s))?,
        None => writeln!(summary, "slope=n/a")?,
    }
    Ok(())
}

fn run_twisted(a: TwistedArgs) -> CliResult {
    let m = PrimePowerModulus::new(a.p, a.k)?;
    let table = coefficients(required_table_len(a.n), None)?;
    let r = twisted_sum(a.n, a.ell, &m, &BumpFunction::smooth(), &table)?;
    println!("S = {}", complex(r.value));
    println!("abs = {}", fmt_g17(r.value.norm()));
    println!("reference = {}", fmt_g17(r.reference));
    println!("terms = {}", r.terms);
    Ok(())
}

fn run_poisson(a: PoissonArgs) -> CliResult {
    let r = poisson_check(a.c, a.beta, a.sigma)?;
    println!("lhs = {}", fmt_g17(r.lhs));
    println!("rhs = {}", fmt_g17(r.rhs));
    println!("residual = {}", fmt_g17(r.residual));
    Ok(())
}

fn run_bench(a: BenchArgs) -> CliResult {
    let r = bench_kl3(a.p, a.k, a.samples, a.seed)?;
    println!("q = {} ({}^{}), samples = {}", r.q, r.p, r.k, r.samples);
    println!("closed_per_call_ns = {}", r.closed_per_call.as_nanos());
    match (r.brute_per_call, r.speedup()) {
        (Some(b), Some(s)) => {
            println!("brute_samples = {}", r.brute_samples);
            println!("brute_per_call_ns = {}", b.as_nanos());
            println!("max_abs_difference = {:.3e}", r.max_discrepancy.unwrap_or(0.0));
            println!("speedup = {s:.1}");
        }
        _ => println!("brute force skipped (q^2 above budget)"),
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> CliResult {
    let profile = match a.profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let fault: Fault = a.inject_fault.parse()?;
    let report = verify(profile, fault)?;
    println!("{report}");
    match report.first_failure() {
        None => Ok(()),
        Some(s) => {
            eprintln!(
                "verification failed in {} ({}): {}",
                s.id,
                s.title,
                s.failure.as_deref().unwrap_or("")
            );
            Err(Failure::Verify)
        }
    }
}
