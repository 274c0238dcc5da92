//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any
//! criterion fails. Runs under `cargo test` with a custom harness so the
//! report is always printed.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Signed;

use relbounds::decimal::{parse_rational, to_f64};
use relbounds::geometry::{affinely_independent, brute_force_facets, lower_facets, upper_facets, PrismatoidVertex};
use relbounds::moments::{
    definetti_to_factorial, denormalize, factorial_to_definetti, factorial_to_raw, moments_of, normalize,
    pmf_from_factorial, raw_to_factorial,
};
use relbounds::numeric::{int, rat, Rational};
use relbounds::oracle::{lp_bounds, verify_sweep};
use relbounds::{random_distribution, sharp_bounds, Distribution, MomentTriple, RegionQuery, Simplex};

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Feasible `w1` range for `n = 7`, `k = 4`, `rho2 = 0.2`, `rho3 = 0.1`.
fn feasible_w1_interval() -> Outcome {
    const EXPECTED: (f64, f64) = (0.03883, 0.94867);
    const TOLERANCE: f64 = 1e-4;
    const BUDGET: Duration = Duration::from_secs(5);

    let start = Instant::now();
    let query = RegionQuery::new(7, 4, Some(parse_rational("0.2").unwrap()), Some(parse_rational("0.1").unwrap()))
        .map_err(|e| e.to_string())?;
    let rows = query.sweep(101).map_err(|e| e.to_string())?;
    let (lo, hi) = query
        .feasible_interval(101, &rat(1, 10_000_000))
        .map_err(|e| e.to_string())?
        .ok_or("no feasible w1 on the grid")?;
    let elapsed = start.elapsed();

    let (lo, hi) = (to_f64(&lo), to_f64(&hi));
    let within = |got: f64, want: f64| (got - want).abs() <= TOLERANCE;
    ensure(within(lo, EXPECTED.0) && within(hi, EXPECTED.1), || {
        format!("computed [{lo:.6}, {hi:.6}], expected [{}, {}] within {TOLERANCE:e}", EXPECTED.0, EXPECTED.1)
    })?;
    ensure(elapsed < BUDGET, || format!("took {elapsed:?}"))?;
    // the sweep must agree with the interval: feasible exactly inside it
    for row in &rows {
        let w = to_f64(&row.w1);
        let inside = lo <= w && w <= hi;
        ensure(row.feasible() == inside, || format!("grid point {w} feasible = {}", row.feasible()))?;
        if let Some((min, max)) = &row.bounds {
            ensure(min <= max && !min.is_negative() && *max <= int(1), || format!("bad bounds at w1 = {w}"))?;
        }
    }
    Ok(format!("w1 in [{lo:.5}, {hi:.5}] in {:.2}s", elapsed.as_secs_f64()))
}

/// Closed form equals the brute-force LP on 200 random distributions for
/// every `n` in 3..=10 and every `k` in 1..=n.
fn oracle_equivalence() -> Outcome {
    let summary =
        verify_sweep(3..=10, |n| (1..=n).collect(), 0..200u64, None).map_err(|e| format!("sweep error: {e}"))?;
    ensure(summary.cases == 200 * (3..=10).sum::<usize>(), || format!("ran {} cases", summary.cases))?;
    if let Some(first) = summary.failures.first() {
        return Err(format!("{} of {} cases differ; first:\n{first}", summary.failures.len(), summary.cases));
    }
    Ok(format!("{} cases agree exactly", summary.cases))
}

/// Uniform distribution on {0..7}, k = 4.
fn worked_instance() -> Outcome {
    let uniform = Distribution::uniform(7).map_err(|e| e.to_string())?;
    let mu = MomentTriple::of_distribution(&uniform);
    let b = sharp_bounds(&mu, 4).map_err(|e| e.to_string())?;
    ensure((b.min(), b.max()) == (&rat(23, 72), &rat(49, 72)), || format!("bounds [{}, {}]", b.min(), b.max()))?;

    let argmin = Distribution::from_atoms(7, &[(0, rat(7, 36)), (3, rat(35, 72)), (6, rat(7, 36)), (7, rat(1, 8))])
        .map_err(|e| e.to_string())?;
    let argmax = Distribution::from_atoms(7, &[(0, rat(1, 8)), (1, rat(7, 36)), (4, rat(35, 72)), (7, rat(7, 36))])
        .map_err(|e| e.to_string())?;
    ensure(b.argmin() == &argmin, || format!("argmin {}", b.argmin()))?;
    ensure(b.argmax() == &argmax, || format!("argmax {}", b.argmax()))?;

    let raw = vec![rat(7, 2), rat(35, 2), int(98)];
    for d in [b.argmin(), b.argmax()] {
        ensure(moments_of(d, 3).values == raw, || format!("{d} has raw moments {:?}", moments_of(d, 3).values))?;
    }
    Ok("[23/72, 49/72] with the expected extremal distributions".into())
}

/// The two four-family descriptions cover exactly the facets found by
/// brute force on the lifted prismatoid.
fn facet_families() -> Outcome {
    let mut checked = 0;
    for n in 4..=10 {
        for k in 1..=n {
            let families: BTreeSet<_> =
                upper_facets(k, n).iter().chain(&lower_facets(k, n)).map(Simplex::key).collect();
            let brute: BTreeSet<_> =
                brute_force_facets(k, n).map_err(|e| format!("n={n} k={k}: {e}"))?.iter().map(Simplex::key).collect();
            ensure(families == brute, || {
                let missing: Vec<_> = brute.difference(&families).collect();
                let extra: Vec<_> = families.difference(&brute).collect();
                format!("n={n} k={k}: missing {missing:?}, extra {extra:?}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, k) pairs match"))
}

/// Every 5 prismatoid vertices meeting both bases are affinely independent.
fn general_position() -> Outcome {
    let mut subsets = 0usize;
    for n in 4..=8 {
        for k in 1..=n {
            let vertices: Vec<PrismatoidVertex> = (0..=n).map(|i| PrismatoidVertex::new(i, k, n, 3)).collect();
            for pick in combinations(n + 1, 5) {
                let chosen: Vec<PrismatoidVertex> = pick.iter().map(|&i| vertices[i].clone()).collect();
                let lifted = chosen.iter().filter(|v| v.lifted).count();
                if lifted == 0 || lifted == 5 {
                    continue;
                }
                subsets += 1;
                let independent = affinely_independent(&chosen).map_err(|e| e.to_string())?;
                ensure(independent, || format!("n={n} k={k}: {pick:?} is affinely dependent"))?;
            }
        }
    }
    Ok(format!("{subsets} subsets have nonzero determinant"))
}

/// The true tail lies inside the bounds and both bounds are attained by
/// distributions with the same three moments.
fn sandwich_and_tightness() -> Outcome {
    for seed in 0..1000u64 {
        let n = 3 + (seed % 8) as usize;
        let k = (seed / 8) as usize % (n + 1);
        let d = random_distribution(n, seed);
        let mu = MomentTriple::of_distribution(&d);
        let b = sharp_bounds(&mu, k).map_err(|e| format!("seed {seed}: {e}"))?;
        let truth = d.tail_probability(k);
        ensure(b.min() <= &truth && &truth <= b.max(), || {
            format!("seed {seed}: tail {truth} outside [{}, {}]", b.min(), b.max())
        })?;
        for (d, value) in [(b.argmin(), b.min()), (b.argmax(), b.max())] {
            ensure(MomentTriple::of_distribution(d) == mu, || format!("seed {seed}: {d} changes the moments"))?;
            ensure(&d.tail_probability(k) == value, || format!("seed {seed}: {d} does not attain {value}"))?;
        }
    }
    Ok("1000 distributions sandwiched, both bounds attained".into())
}

/// More moments never loosen the bounds.
fn nesting() -> Outcome {
    let mut cases = 0;
    for seed in 0..300u64 {
        let n = 3 + (seed % 8) as usize;
        let mu = MomentTriple::of_distribution(&random_distribution(n, 10_000 + seed));
        for k in 0..=n {
            let three = sharp_bounds(&mu, k).map_err(|e| e.to_string())?;
            let two = lp_bounds(&mu, k, 2).map_err(|e| e.to_string())?;
            let one = lp_bounds(&mu, k, 1).map_err(|e| e.to_string())?;
            ensure(&two.min <= three.min() && three.max() <= &two.max, || {
                format!("seed {seed} k={k}: three-moment bounds escape two-moment bounds")
            })?;
            ensure(one.min <= two.min && two.max <= one.max, || {
                format!("seed {seed} k={k}: two-moment bounds escape one-moment bounds")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases nested"))
}

/// Moment conversions are exact inverses and recover the pmf.
fn round_trips() -> Outcome {
    for seed in 0..1000u64 {
        let n = 3 + (seed % 8) as usize;
        let d = random_distribution(n, 20_000 + seed);
        let raw = moments_of(&d, n);
        let fm = raw_to_factorial(&raw);
        ensure(factorial_to_raw(&fm) == raw, || format!("seed {seed}: raw -> factorial -> raw"))?;
        let w = factorial_to_definetti(&fm).map_err(|e| e.to_string())?;
        ensure(definetti_to_factorial(&w).map_err(|e| e.to_string())? == fm, || {
            format!("seed {seed}: factorial -> w -> factorial")
        })?;
        ensure(w.to_raw().map_err(|e| e.to_string())? == raw, || format!("seed {seed}: w -> raw"))?;

        let first3 = moments_of(&d, 3);
        let mt = normalize(&first3).map_err(|e| e.to_string())?;
        ensure(denormalize(&mt) == first3, || format!("seed {seed}: raw -> normalized -> raw"))?;

        let pmf = pmf_from_factorial(&fm).map_err(|e| e.to_string())?;
        ensure(pmf == d, || format!("seed {seed}: pmf {pmf} differs from {d}"))?;
    }
    // the linear conversions hold for arbitrary vectors, not just moments
    for seed in 0..1000u64 {
        let n = 3 + (seed % 8) as usize;
        let weights = random_distribution(n, 30_000 + seed);
        let values: Vec<Rational> =
            weights.masses().iter().skip(1).enumerate().map(|(j, m)| m * int(j as i64 + 1) - rat(1, 3)).collect();
        let raw = relbounds::RawMoments { n, values };
        ensure(factorial_to_raw(&raw_to_factorial(&raw)) == raw, || format!("seed {seed}: arbitrary raw vector"))?;
    }
    Ok("1000 distributions and 1000 arbitrary vectors round-trip exactly".into())
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("feasible w1 interval (n=7, k=4, rho2=0.2, rho3=0.1)", feasible_w1_interval),
        ("closed form equals LP oracle", oracle_equivalence),
        ("uniform on {0..7}, k=4", worked_instance),
        ("facet families equal brute-force facets", facet_families),
        ("prismatoid vertices in general position", general_position),
        ("sandwich and tightness", sandwich_and_tightness),
        ("nesting of 3-, 2- and 1-moment bounds", nesting),
        ("moment conversion round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
