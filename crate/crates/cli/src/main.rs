//! `relbounds`: sharp three-moment bounds on `P(S >= k)` from the command line.
//!
//! Exit codes: 0 success, 2 argument error, 3 infeasible input,
//! 4 verification failure. The worker count for parallel sweeps is read
//! from `RELBOUNDS_WORKERS` (defaults to the number of CPUs).

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relbounds::decimal::{format_sig, parse_rational};
use relbounds::geometry::{brute_force_facets, lower_facets, upper_facets};
use relbounds::moments::{
    bahadur_to_definetti, definetti_to_bahadur, definetti_to_factorial, denormalize, factorial_to_definetti,
    factorial_to_raw, normalize, raw_to_factorial, Converted,
};
use relbounds::oracle::{inject_fault, verify_sweep};
use relbounds::region::region_csv;
use relbounds::{
    sharp_bounds, BahadurParams, Block, DeFinettiParams, Error, FactorialMoments, MomentTriple, Rational, RawMoments,
    RegionQuery, Side, Simplex,
};

const WORKERS_ENV: &str = "RELBOUNDS_WORKERS";

const EXIT_ARGUMENT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

/// Significant digits for decimal renderings of values that are not exact.
const APPROX_DIGITS: u32 = 30;

#[derive(Parser)]
#[command(name = "relbounds", version, about = "Sharp three-moment bounds on k-out-of-n reliability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp bounds on P(S >= k) given three moments of S.
    Bounds(BoundsArgs),
    /// CSV of the admissible (w1, P(S >= k)) region with correlations fixed.
    Region(RegionArgs),
    /// Convert three moments between parameterizations.
    Convert(ConvertArgs),
    /// Check the closed form against the brute-force LP on random inputs.
    Verify(VerifyArgs),
    /// List the upper and lower subdivision simplexes.
    Facets(FacetsArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("moments").required(true).multiple(false))]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Normalized moments E[(S/n)^j], j = 1, 2, 3.
    #[arg(long, num_args = 3, value_names = ["MU1", "MU2", "MU3"], group = "moments", allow_negative_numbers = true)]
    mu: Option<Vec<String>>,
    /// Raw moments E[S^j], j = 1, 2, 3.
    #[arg(long, num_args = 3, value_names = ["M1", "M2", "M3"], group = "moments", allow_negative_numbers = true)]
    raw: Option<Vec<String>>,
    /// Joint success probabilities w1, w2, w3 of the exchangeable components.
    #[arg(long, num_args = 3, value_names = ["W1", "W2", "W3"], group = "moments", allow_negative_numbers = true)]
    w: Option<Vec<String>>,
    /// Mean and Bahadur correlations w1, rho2, rho3.
    #[arg(long, num_args = 3, value_names = ["W1", "RHO2", "RHO3"], group = "moments", allow_negative_numbers = true)]
    bahadur: Option<Vec<String>>,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Fix the second Bahadur correlation.
    #[arg(long, allow_negative_numbers = true)]
    rho2: Option<String>,
    /// Fix the third Bahadur correlation (requires --rho2).
    #[arg(long, allow_negative_numbers = true, requires = "rho2")]
    rho3: Option<String>,
    /// Number of equally spaced w1 values in [0, 1].
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Param {
    /// Raw moments E[S^j].
    Raw,
    /// Normalized moments E[(S/n)^j].
    Mu,
    /// Factorial moments E[S(S-1)...(S-j+1)].
    Factorial,
    /// Joint success probabilities w1, w2, w3.
    W,
    /// w1 and the Bahadur correlations rho2, rho3.
    #[value(alias = "rho")]
    Bahadur,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    from: Param,
    #[arg(long, value_enum)]
    to: Param,
    #[arg(long)]
    n: usize,
    #[arg(num_args = 3, value_names = ["A", "B", "C"], allow_negative_numbers = true, required = true)]
    values: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Smallest n in the sweep.
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    /// Largest n in the sweep.
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// A single n (overrides --n-min and --n-max).
    #[arg(long, conflicts_with_all = ["n_min", "n_max"])]
    n: Option<usize>,
    /// `all` for every k in 1..=n, or a comma-separated list of k values
    /// (values above n are skipped).
    #[arg(long, default_value = "all")]
    k: String,
    /// Number of random distributions per n.
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt every closed-form result before comparison (self-test).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct FacetsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Also enumerate facets by brute force and print the difference.
    #[arg(long)]
    brute: bool,
}

/// Writes to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
fn emit(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(&format!($($arg)*)) };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(&format!("{}\n", format_args!($($arg)*))) };
}

/// A failure with its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn argument(message: impl Into<String>) -> Self {
        Failure { code: EXIT_ARGUMENT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::IndexExceedsN { .. } => EXIT_ARGUMENT,
            Error::Infeasible(_) | Error::BahadurUndefined(_) | Error::InvalidDistribution(_) => EXIT_INFEASIBLE,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_workers().and_then(|()| match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Region(args) => cmd_region(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Facets(args) => cmd_facets(args),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_workers() -> CmdResult {
    let Ok(text) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| Failure::argument(format!("{WORKERS_ENV} must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Failure::argument(format!("cannot start {workers} workers: {e}")))
}

fn parse_values(texts: &[String]) -> Result<Vec<Rational>, Failure> {
    texts.iter().map(|t| parse_rational(t).map_err(Failure::from)).collect()
}

fn check_k(n: usize, k: usize) -> CmdResult {
    if k > n {
        return Err(Failure::argument(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> CmdResult {
    check_k(args.n, args.k)?;
    let n = args.n;
    let triple = |v: Vec<Rational>| -> [Rational; 3] { v.try_into().expect("clap enforces three values") };
    let mu = if let Some(v) = &args.mu {
        let [a, b, c] = triple(parse_values(v)?);
        MomentTriple::new(n, a, b, c)?
    } else if let Some(v) = &args.raw {
        normalize(&RawMoments { n, values: parse_values(v)? })?
    } else if let Some(v) = &args.w {
        DeFinettiParams { n, w: parse_values(v)? }.to_moment_triple()?
    } else if let Some(v) = &args.bahadur {
        let [w1, rho2, rho3] = triple(parse_values(v)?);
        let converted = bahadur_to_definetti(&BahadurParams { n, w1, rho2, rho3 })?;
        if !converted.exact {
            eprintln!("note: rho3 term is irrational; moments are accurate to 1e-30");
        }
        converted.value.to_moment_triple()?
    } else {
        unreachable!("clap requires one moment specification")
    };
    out!("{}", sharp_bounds(&mu, args.k)?);
    Ok(())
}

fn cmd_region(args: RegionArgs) -> CmdResult {
    let rho2 = args.rho2.as_deref().map(parse_rational).transpose()?;
    let rho3 = args.rho3.as_deref().map(parse_rational).transpose()?;
    let query = RegionQuery::new(args.n, args.k, rho2, rho3)?;
    let rows = query.sweep(args.steps)?;
    out!("{}", region_csv(&rows));
    let tol = Rational::new(1.into(), 1_000_000.into());
    match query.feasible_interval(args.steps, &tol)? {
        Some((lo, hi)) => eprintln!("feasible w1: [{}, {}]", format_sig(&lo, 12), format_sig(&hi, 12)),
        None => eprintln!("feasible w1: none on the grid"),
    }
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> CmdResult {
    let n = args.n;
    if n == 0 {
        return Err(Failure::argument("n must be positive"));
    }
    if n < 3 {
        return Err(Failure::argument(format!("three moments need n >= 3, got {n}")));
    }
    let values = parse_values(&args.values)?;
    let hub = to_definetti(args.from, n, values)?;
    let out = from_definetti(args.to, &hub.value)?;
    let exact = hub.exact && out.exact;
    let render = |xs: &[Rational], digits: u32| xs.iter().map(|x| format_sig(x, digits)).collect::<Vec<_>>().join(" ");
    outln!("n: {n}");
    outln!("to: {}", param_name(args.to));
    if exact {
        outln!("values: {}", out.value.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        outln!("decimal: {}", render(&out.value, 12));
    } else {
        outln!("values: {}", render(&out.value, APPROX_DIGITS));
        outln!("decimal: {}", render(&out.value, 12));
    }
    outln!("exact: {exact}");
    Ok(())
}

fn param_name(p: Param) -> &'static str {
    match p {
        Param::Raw => "raw",
        Param::Mu => "mu",
        Param::Factorial => "factorial",
        Param::W => "w",
        Param::Bahadur => "bahadur",
    }
}

fn to_definetti(from: Param, n: usize, values: Vec<Rational>) -> Result<Converted<DeFinettiParams>, Failure> {
    let exact = |value| Ok(Converted { value, exact: true });
    match from {
        Param::W => exact(DeFinettiParams { n, w: values }),
        Param::Factorial => exact(factorial_to_definetti(&FactorialMoments { n, values })?),
        Param::Raw => exact(factorial_to_definetti(&raw_to_factorial(&RawMoments { n, values }))?),
        Param::Mu => {
            let [a, b, c]: [Rational; 3] = values.try_into().expect("clap enforces three values");
            let raw = denormalize(&MomentTriple::new(n, a, b, c)?);
            exact(factorial_to_definetti(&raw_to_factorial(&raw))?)
        }
        Param::Bahadur => {
            let [w1, rho2, rho3]: [Rational; 3] = values.try_into().expect("clap enforces three values");
            Ok(bahadur_to_definetti(&BahadurParams { n, w1, rho2, rho3 })?)
        }
    }
}

fn from_definetti(to: Param, w: &DeFinettiParams) -> Result<Converted<Vec<Rational>>, Failure> {
    let exact = |value| Ok(Converted { value, exact: true });
    match to {
        Param::W => exact(w.w.clone()),
        Param::Factorial => exact(definetti_to_factorial(w)?.values),
        Param::Raw => exact(factorial_to_raw(&definetti_to_factorial(w)?).values),
        Param::Mu => exact(w.to_moment_triple()?.coords().to_vec()),
        Param::Bahadur => {
            let b = definetti_to_bahadur(w)?;
            Ok(Converted { value: vec![b.value.w1, b.value.rho2, b.value.rho3], exact: b.exact })
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let (n_min, n_max) = args.n.map_or((args.n_min, args.n_max), |n| (n, n));
    if n_min < 3 || n_min > n_max {
        return Err(Failure::argument(format!("need 3 <= n-min <= n-max, got {n_min}..={n_max}")));
    }
    if args.seeds == 0 {
        return Err(Failure::argument("--seeds must be positive"));
    }
    let ks = parse_k_policy(&args.k)?;
    let seeds = args.seed..args.seed.saturating_add(args.seeds);
    let tamper = args.inject_fault.then_some(inject_fault as fn(&mut _));

    let start = Instant::now();
    let summary = verify_sweep(n_min..=n_max, |n| ks.values(n), seeds, tamper)?;
    let elapsed = start.elapsed();

    outln!("n: {n_min}..={n_max}");
    outln!("k: {}", args.k);
    outln!("seeds: {}..{}", args.seed, args.seed.saturating_add(args.seeds));
    outln!("cases: {}", summary.cases);
    outln!("passed: {}", summary.passed);
    outln!("failed: {}", summary.failures.len());
    outln!("elapsed: {:.3}s", elapsed.as_secs_f64());
    if let Some(first) = summary.failures.first() {
        outln!("first_failure:");
        out!("{first}");
        return Err(Failure {
            code: EXIT_VERIFICATION,
            message: format!("{} of {} cases failed", summary.failures.len(), summary.cases),
        });
    }
    outln!("status: pass");
    Ok(())
}

enum KPolicy {
    All,
    List(Vec<usize>),
}

impl KPolicy {
    fn values(&self, n: usize) -> Vec<usize> {
        match self {
            KPolicy::All => (1..=n).collect(),
            KPolicy::List(ks) => ks.iter().copied().filter(|&k| k <= n).collect(),
        }
    }
}

fn parse_k_policy(text: &str) -> Result<KPolicy, Failure> {
    if text == "all" {
        return Ok(KPolicy::All);
    }
    let ks: Result<BTreeSet<usize>, _> = text.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match ks {
        Ok(ks) if !ks.is_empty() => Ok(KPolicy::List(ks.into_iter().collect())),
        _ => Err(Failure::argument(format!("--k must be `all` or a comma-separated list of integers, got {text:?}"))),
    }
}

fn cmd_facets(args: FacetsArgs) -> CmdResult {
    let (n, k) = (args.n, args.k);
    if n < 3 {
        return Err(Failure::argument(format!("the moment polytope needs n >= 3, got {n}")));
    }
    check_k(n, k)?;
    let upper = upper_facets(k, n);
    let lower = lower_facets(k, n);
    outln!("# upper facets, apex {k}");
    print_side(Side::Upper, &upper);
    match k.checked_sub(1) {
        Some(apex) => outln!("# lower facets, apex {apex}"),
        None => outln!("# lower facets: none for k = 0"),
    }
    if k > 0 {
        print_side(Side::Lower, &lower);
    }
    if !args.brute {
        return Ok(());
    }

    let brute = brute_force_facets(k, n)?;
    let families: BTreeSet<_> = upper.iter().chain(&lower).map(Simplex::key).collect();
    let found: BTreeSet<_> = brute.iter().map(Simplex::key).collect();
    let missing: Vec<&Simplex> = brute.iter().filter(|s| !families.contains(&s.key())).collect();
    let extra: Vec<&Simplex> = upper.iter().chain(&lower).filter(|s| !found.contains(&s.key())).collect();
    outln!("# brute force: {} facets", brute.len());
    if missing.is_empty() && extra.is_empty() {
        outln!("# diff: identical");
        return Ok(());
    }
    outln!("# diff: families differ from brute force");
    for s in extra {
        outln!("- {s}");
    }
    for s in missing {
        outln!("+ {s}");
    }
    Err(Failure { code: EXIT_VERIFICATION, message: "facet families differ from brute-force facets".into() })
}

fn print_side(side: Side, simplexes: &[Simplex]) {
    for b in 1..=4 {
        let block = Block::from_number(b).expect("blocks are numbered 1..=4");
        let members: Vec<&Simplex> = simplexes.iter().filter(|s| s.block == block).collect();
        if members.is_empty() {
            outln!("# {} block {b}: empty", side.tag());
        }
        for s in members {
            outln!("{s}");
        }
    }
}
