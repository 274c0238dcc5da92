//! Brute-force ground truth for the closed forms.
//!
//! Sharp bounds are the optima of a linear program over pmfs on `{0..n}`
//! with the first `m` moments fixed. Its optima sit at basic feasible
//! solutions, which have at most `m + 1` atoms, so enumerating every support
//! of that size and solving the moment equations exactly is exhaustive.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{sharp_bounds, BoundsResult};
use crate::decimal::format_sig;
use crate::error::{Error, Result};
use crate::moments::{Distribution, MomentTriple};
use crate::numeric::{solve_exact, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub min: Rational,
    pub max: Rational,
    pub argmin: Distribution,
    pub argmax: Distribution,
    pub supports_searched: usize,
    pub feasible_bases: usize,
}

/// Every feasible basic solution for one moment prefix.
#[derive(Debug, Clone)]
pub struct BasicSolutions {
    n: usize,
    /// Feasible distributions keyed by support, in lexicographic order.
    solutions: Vec<(Vec<usize>, Distribution)>,
    supports_searched: usize,
}

impl BasicSolutions {
    /// `moments[j-1]` is `E[(S/n)^j]`.
    pub fn enumerate(n: usize, moments: &[Rational]) -> Result<Self> {
        let m = moments.len();
        if m == 0 || m > n {
            return Err(Error::InvalidArgument(format!("need 1 <= number of moments <= n, got {m} with n = {n}")));
        }
        let points: Vec<Vec<Rational>> = (0..=n)
            .map(|i| {
                let x = Rational::new(BigInt::from(i), BigInt::from(n));
                let mut powers = vec![Rational::one()];
                for j in 0..m {
                    let next = &powers[j] * &x;
                    powers.push(next);
                }
                powers
            })
            .collect();
        let mut rhs = vec![Rational::one()];
        rhs.extend(moments.iter().cloned());

        let supports: Vec<Vec<usize>> = (1..=m + 1).flat_map(|size| combinations(n + 1, size)).collect();
        let supports_searched = supports.len();
        let mut solutions: Vec<(Vec<usize>, Distribution)> = supports
            .into_par_iter()
            .filter_map(|support| {
                let a: Vec<Vec<Rational>> =
                    (0..=m).map(|row| support.iter().map(|&i| points[i][row].clone()).collect()).collect();
                let masses = solve_exact(&a, &rhs)?;
                // a zero mass means the same distribution is also the solution
                // on a smaller support, which is enumerated separately
                if !masses.iter().all(Signed::is_positive) {
                    return None;
                }
                let atoms: Vec<(usize, Rational)> = support.iter().copied().zip(masses).collect();
                let dist = Distribution::from_atoms(n, &atoms).ok()?;
                Some((support, dist))
            })
            .collect();
        solutions.sort_by(|a, b| a.0.cmp(&b.0));
        if solutions.is_empty() {
            return Err(Error::Infeasible(format!("no distribution on {{0..{n}}} has these {m} moments")));
        }
        Ok(BasicSolutions { n, solutions, supports_searched })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn distributions(&self) -> impl Iterator<Item = &Distribution> {
        self.solutions.iter().map(|(_, d)| d)
    }

    /// Extremes of `P(S >= k)`; ties keep the lexicographically smallest support.
    pub fn bounds(&self, k: usize) -> Result<OracleReport> {
        if k > self.n {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {}", self.n)));
        }
        let mut best_min: Option<(Rational, &Distribution)> = None;
        let mut best_max: Option<(Rational, &Distribution)> = None;
        for (_, d) in &self.solutions {
            let tail = d.tail_probability(k);
            if best_min.as_ref().is_none_or(|(v, _)| tail < *v) {
                best_min = Some((tail.clone(), d));
            }
            if best_max.as_ref().is_none_or(|(v, _)| tail > *v) {
                best_max = Some((tail, d));
            }
        }
        let (min, argmin) = best_min.ok_or_else(|| Error::Infeasible("no feasible basis".into()))?;
        let (max, argmax) = best_max.ok_or_else(|| Error::Infeasible("no feasible basis".into()))?;
        Ok(OracleReport {
            min,
            max,
            argmin: argmin.clone(),
            argmax: argmax.clone(),
            supports_searched: self.supports_searched,
            feasible_bases: self.solutions.len(),
        })
    }
}

fn combinations(pool: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn go(start: usize, pool: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..pool {
            if pool - i < size - current.len() {
                break;
            }
            current.push(i);
            go(i + 1, pool, size, current, out);
            current.pop();
        }
    }
    go(0, pool, size, &mut current, &mut out);
    out
}

/// Oracle bounds using the first `moments.len()` normalized moments.
pub fn lp_bounds_prefix(n: usize, moments: &[Rational], k: usize) -> Result<OracleReport> {
    BasicSolutions::enumerate(n, moments)?.bounds(k)
}

/// Oracle bounds using the first `num_moments` (1 to 3) moments of `mu`.
pub fn lp_bounds(mu: &MomentTriple, k: usize, num_moments: usize) -> Result<OracleReport> {
    if !(1..=3).contains(&num_moments) {
        return Err(Error::InvalidArgument(format!("num_moments must be 1, 2 or 3, got {num_moments}")));
    }
    let coords = mu.coords();
    lp_bounds_prefix(mu.n(), &coords[..num_moments], k)
}

/// A reproducible pmf on `{0..n}`.
///
/// Draws integer weights uniformly from `0..=12` with a ChaCha8 stream
/// seeded by `seed` and `n`, redrawing if all are zero, and normalizes by
/// their sum. Zero weights are common enough that low-support (boundary)
/// cases show up alongside interior ones.
pub fn random_distribution(n: usize, seed: u64) -> Distribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ n as u64);
    loop {
        let weights: Vec<u32> = (0..=n).map(|_| rng.gen_range(0..=12)).collect();
        let total: u32 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let masses = weights.iter().map(|&w| Rational::new(BigInt::from(w), BigInt::from(total))).collect();
        return Distribution::new(masses).expect("normalized weights form a pmf");
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: usize,
    pub k: usize,
    pub query: MomentTriple,
    pub closed_form: Option<(Rational, Rational)>,
    pub oracle: Option<(Rational, Rational)>,
    /// First discrepancy found; `None` means the case passed.
    pub discrepancy: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.discrepancy.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pair = |p: &Option<(Rational, Rational)>| match p {
            Some((lo, hi)) => format!("[{lo}, {hi}] ([{}, {}])", format_sig(lo, 12), format_sig(hi, 12)),
            None => "-".to_string(),
        };
        writeln!(f, "status: {}", if self.passed() { "pass" } else { "fail" })?;
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "k: {}", self.k)?;
        writeln!(f, "mu: {}", self.query)?;
        writeln!(f, "closed_form: {}", pair(&self.closed_form))?;
        writeln!(f, "oracle: {}", pair(&self.oracle))?;
        if let Some(d) = &self.discrepancy {
            writeln!(f, "discrepancy: {d}")?;
        }
        Ok(())
    }
}

/// Checks a closed-form result against oracle output for the same query.
pub fn compare(result: &BoundsResult, oracle: &OracleReport) -> VerifyReport {
    let mut report = VerifyReport {
        n: result.n(),
        k: result.k,
        query: result.query.clone(),
        closed_form: Some((result.min().clone(), result.max().clone())),
        oracle: Some((oracle.min.clone(), oracle.max.clone())),
        discrepancy: None,
    };
    let k = result.k;
    let checks: [(bool, String); 6] = [
        (*result.min() == oracle.min, format!("min {} differs from oracle min {}", result.min(), oracle.min)),
        (*result.max() == oracle.max, format!("max {} differs from oracle max {}", result.max(), oracle.max)),
        (
            MomentTriple::of_distribution(result.argmin()) == result.query,
            format!("argmin {} does not reproduce the moments", result.argmin()),
        ),
        (
            MomentTriple::of_distribution(result.argmax()) == result.query,
            format!("argmax {} does not reproduce the moments", result.argmax()),
        ),
        (
            result.argmin().tail_probability(k) == *result.min(),
            format!("argmin tail {} does not attain min {}", result.argmin().tail_probability(k), result.min()),
        ),
        (
            result.argmax().tail_probability(k) == *result.max(),
            format!("argmax tail {} does not attain max {}", result.argmax().tail_probability(k), result.max()),
        ),
    ];
    report.discrepancy = checks.into_iter().find(|(ok, _)| !ok).map(|(_, msg)| msg);
    report
}

/// Runs the closed form and the oracle on one query and compares them.
pub fn verify(mu: &MomentTriple, k: usize) -> VerifyReport {
    let closed = sharp_bounds(mu, k);
    let oracle = lp_bounds(mu, k, 3);
    match (closed, oracle) {
        (Ok(result), Ok(oracle)) => compare(&result, &oracle),
        (closed, oracle) => {
            // both must agree the query is infeasible
            let both_infeasible =
                matches!(closed, Err(Error::Infeasible(_))) && matches!(oracle, Err(Error::Infeasible(_)));
            VerifyReport {
                n: mu.n(),
                k,
                query: mu.clone(),
                closed_form: closed.as_ref().ok().map(|r| (r.min().clone(), r.max().clone())),
                oracle: oracle.as_ref().ok().map(|r| (r.min.clone(), r.max.clone())),
                discrepancy: (!both_infeasible).then(|| {
                    format!(
                        "closed form: {}; oracle: {}",
                        closed.err().map_or("ok".to_string(), |e| e.to_string()),
                        oracle.err().map_or("ok".to_string(), |e| e.to_string())
                    )
                }),
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<VerifyReport>,
}

/// Verifies every `k` in `ks` against `seeds` random distributions for each
/// `n` in `ns`. Each distribution's basic solutions are enumerated once and
/// reused for every `k`. `tamper`, when set, perturbs each closed-form result
/// before comparison (used to exercise the failure path).
pub fn verify_sweep(
    ns: impl IntoIterator<Item = usize>,
    ks: impl Fn(usize) -> Vec<usize> + Sync,
    seeds: impl IntoIterator<Item = u64> + Clone + Send + Sync,
    tamper: Option<fn(&mut BoundsResult)>,
) -> Result<SweepSummary> {
    let jobs: Vec<(usize, u64)> = ns.into_iter().flat_map(|n| seeds.clone().into_iter().map(move |s| (n, s))).collect();
    let reports: Vec<Vec<VerifyReport>> = jobs
        .par_iter()
        .map(|&(n, seed)| -> Result<Vec<VerifyReport>> {
            let mu = MomentTriple::of_distribution(&random_distribution(n, seed));
            let basis = BasicSolutions::enumerate(n, &mu.coords())?;
            ks(n)
                .into_iter()
                .map(|k| {
                    let mut result = sharp_bounds(&mu, k)?;
                    if let Some(f) = tamper {
                        f(&mut result);
                    }
                    Ok(compare(&result, &basis.bounds(k)?))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut summary = SweepSummary::default();
    for report in reports.into_iter().flatten() {
        summary.cases += 1;
        if report.passed() {
            summary.passed += 1;
        } else {
            summary.failures.push(report);
        }
    }
    Ok(summary)
}

/// Corrupts the maximum by a tiny amount; a verification self-test.
pub fn inject_fault(result: &mut BoundsResult) {
    result.upper.value += Rational::new(BigInt::one(), BigInt::from(1_000_000));
}
