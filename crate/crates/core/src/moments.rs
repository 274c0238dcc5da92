//! Moment parameterizations of a distribution on `{0, ..., n}` and the exact
//! conversions among them.
//!
//! Four equivalent views are supported: ordinary moments `E[S^j]`, factorial
//! moments `E[S(S-1)...(S-i+1)]`, de Finetti parameters `w_i` of an
//! exchangeable Bernoulli sequence, and Bahadur correlations `rho_i`. The
//! normalized triple `(mu1, mu2, mu3)` of `S/n` is the query type of every
//! bound computation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::decimal::{approximation_tolerance, pow_three_halves};
use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, stirling_first_signed, stirling_second, Rational};

/// Probability mass function on `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    n: usize,
    masses: Vec<Rational>,
}

impl Distribution {
    pub fn new(masses: Vec<Rational>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidDistribution("support {0..n} needs n >= 1".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| m.is_negative() || **m > Rational::one()) {
            return Err(Error::InvalidDistribution(format!("mass {m} at {i} is outside [0, 1]")));
        }
        let total: Rational = masses.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Distribution { n: masses.len() - 1, masses })
    }

    /// Builds a distribution from sparse `(atom, mass)` pairs.
    pub fn from_atoms(n: usize, atoms: &[(usize, Rational)]) -> Result<Self> {
        let mut masses = vec![Rational::zero(); n + 1];
        for (i, m) in atoms {
            if *i > n {
                return Err(Error::IndexExceedsN { index: *i, n });
            }
            masses[*i] += m;
        }
        Distribution::new(masses)
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        Distribution::from_atoms(n, &[(at, Rational::one())])
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let p = Rational::new(BigInt::one(), BigInt::from(n + 1));
        Distribution::new(vec![p; n + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> Rational {
        self.masses.get(i).cloned().unwrap_or_default()
    }

    /// Atoms carrying positive mass, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        self.masses.iter().enumerate().filter(|(_, m)| !m.is_zero()).map(|(i, _)| i).collect()
    }

    /// `P(S >= k)`.
    pub fn tail_probability(&self, k: usize) -> Rational {
        self.masses.iter().skip(k).sum()
    }

    pub fn moments_of(&self, m: usize) -> RawMoments {
        moments_of(self, m)
    }

    /// `index:mass` pairs over the support, space separated.
    pub fn atoms_string(&self) -> String {
        self.support().iter().map(|&i| format!("{}:{}", i, self.masses[i])).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.atoms_string())
    }
}

/// Unnormalized ordinary moments: `values[j-1] = E[S^j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMoments {
    pub n: usize,
    pub values: Vec<Rational>,
}

/// Factorial moments: `values[i-1] = E[S(S-1)...(S-i+1)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialMoments {
    pub n: usize,
    pub values: Vec<Rational>,
}

/// `w[i-1] = P(X_1 = ... = X_i = 1)` for the underlying exchangeable sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeFinettiParams {
    pub n: usize,
    pub w: Vec<Rational>,
}

/// Mean and the second and third Bahadur correlations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BahadurParams {
    pub n: usize,
    pub w1: Rational,
    pub rho2: Rational,
    pub rho3: Rational,
}

/// Result of a conversion that may pass through an irrational 3/2-power.
/// When `exact` is false the value is within `10^-30` of the true one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Converted<T> {
    pub value: T,
    pub exact: bool,
}

/// First three moments of `S/n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MomentTriple {
    n: usize,
    mu1: Rational,
    mu2: Rational,
    mu3: Rational,
}

impl MomentTriple {
    /// Checks the cheap necessary conditions `0 <= mu3 <= mu2 <= mu1 <= 1`.
    /// Full feasibility is a geometric question answered by `membership`.
    pub fn new(n: usize, mu1: Rational, mu2: Rational, mu3: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let zero = Rational::zero();
        let one = Rational::one();
        if mu3 < zero || mu3 > mu2 || mu2 > mu1 || mu1 > one {
            return Err(Error::Infeasible(format!(
                "normalized moments ({mu1}, {mu2}, {mu3}) violate 0 <= mu3 <= mu2 <= mu1 <= 1"
            )));
        }
        Ok(MomentTriple { n, mu1, mu2, mu3 })
    }

    pub fn of_distribution(dist: &Distribution) -> Self {
        normalize(&moments_of(dist, 3)).expect("moments of a distribution are consistent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu1(&self) -> &Rational {
        &self.mu1
    }

    pub fn mu2(&self) -> &Rational {
        &self.mu2
    }

    pub fn mu3(&self) -> &Rational {
        &self.mu3
    }

    pub fn coords(&self) -> [Rational; 3] {
        [self.mu1.clone(), self.mu2.clone(), self.mu3.clone()]
    }
}

impl fmt::Display for MomentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.mu1, self.mu2, self.mu3)
    }
}

pub fn moments_of(dist: &Distribution, m: usize) -> RawMoments {
    let values = (1..=m)
        .map(|j| {
            dist.masses
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(k, p)| p * Rational::from_integer(BigInt::from(k).pow(j as u32)))
                .sum()
        })
        .collect();
    RawMoments { n: dist.n, values }
}

pub fn raw_to_factorial(raw: &RawMoments) -> FactorialMoments {
    let values = (1..=raw.values.len())
        .map(|j| (1..=j).map(|i| Rational::from_integer(stirling_first_signed(j, i)) * &raw.values[i - 1]).sum())
        .collect();
    FactorialMoments { n: raw.n, values }
}

pub fn factorial_to_raw(fm: &FactorialMoments) -> RawMoments {
    let values = (1..=fm.values.len())
        .map(|j| (1..=j).map(|i| Rational::from_integer(stirling_second(j, i)) * &fm.values[i - 1]).sum())
        .collect();
    RawMoments { n: fm.n, values }
}

/// `C(n,i) i!`, the number of ordered `i`-tuples of distinct components.
fn falling(n: usize, i: usize) -> Rational {
    Rational::from_integer(binomial(n as u64, i as u64) * factorial(i as u64))
}

pub fn factorial_to_definetti(fm: &FactorialMoments) -> Result<DeFinettiParams> {
    if fm.values.len() > fm.n {
        return Err(Error::IndexExceedsN { index: fm.values.len(), n: fm.n });
    }
    let w = fm.values.iter().enumerate().map(|(i, v)| v / falling(fm.n, i + 1)).collect();
    Ok(DeFinettiParams { n: fm.n, w })
}

pub fn definetti_to_factorial(params: &DeFinettiParams) -> Result<FactorialMoments> {
    if params.w.len() > params.n {
        return Err(Error::IndexExceedsN { index: params.w.len(), n: params.n });
    }
    let values = params.w.iter().enumerate().map(|(i, w)| w * falling(params.n, i + 1)).collect();
    Ok(FactorialMoments { n: params.n, values })
}

fn check_bahadur_domain(w1: &Rational) -> Result<Rational> {
    if !w1.is_positive() || *w1 >= Rational::one() {
        return Err(Error::BahadurUndefined(w1.to_string()));
    }
    Ok(w1 * (Rational::one() - w1))
}

// Central product moments of exchangeable indicators:
//   E[(X1-w1)(X2-w1)]         = w2 - w1^2
//   E[(X1-w1)(X2-w1)(X3-w1)]  = w3 - 3 w1 w2 + 2 w1^3

pub fn bahadur_to_definetti(b: &BahadurParams) -> Result<Converted<DeFinettiParams>> {
    let var = check_bahadur_domain(&b.w1)?;
    let w1 = &b.w1;
    let w2 = w1 * w1 + &b.rho2 * &var;
    let tol = approximation_tolerance() / (b.rho3.abs() + Rational::one());
    let (pow, exact) = pow_three_halves(&var, &tol)?;
    let w3 =
        Rational::from_integer(3.into()) * w1 * &w2 - Rational::from_integer(2.into()) * w1 * w1 * w1 + &b.rho3 * pow;
    Ok(Converted { value: DeFinettiParams { n: b.n, w: vec![w1.clone(), w2, w3] }, exact })
}

pub fn definetti_to_bahadur(params: &DeFinettiParams) -> Result<Converted<BahadurParams>> {
    if params.w.len() < 3 {
        return Err(Error::InvalidArgument("Bahadur conversion needs w1, w2, w3".into()));
    }
    let (w1, w2, w3) = (&params.w[0], &params.w[1], &params.w[2]);
    let var = check_bahadur_domain(w1)?;
    let rho2 = (w2 - w1 * w1) / &var;
    let central3 = w3 - Rational::from_integer(3.into()) * w1 * w2 + Rational::from_integer(2.into()) * w1 * w1 * w1;
    // rho3 = central3 / var^(3/2) = (central3 / var^2) * sqrt(var)
    let coef = &central3 / (&var * &var);
    let tol = approximation_tolerance() / (coef.abs() + Rational::one());
    let (rho3, exact) = match crate::decimal::exact_sqrt(&var) {
        Some(root) => (&coef * root, true),
        None => (&coef * crate::decimal::sqrt_within(&var, &tol)?, false),
    };
    Ok(Converted { value: BahadurParams { n: params.n, w1: w1.clone(), rho2, rho3 }, exact })
}

/// Inverts the factorial-moment expansion into a pmf; `fm` must carry all
/// `n` factorial moments.
pub fn pmf_from_factorial(fm: &FactorialMoments) -> Result<Distribution> {
    let n = fm.n;
    if fm.values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: fm.values.len() });
    }
    let masses: Vec<Rational> = (0..=n)
        .map(|k| {
            (k..=n)
                .map(|i| {
                    let term = Rational::from_integer(binomial(i as u64, k as u64)) * scaled_factorial(fm, i);
                    if (i - k).is_multiple_of(2) {
                        term
                    } else {
                        -term
                    }
                })
                .sum()
        })
        .collect();
    Distribution::new(masses).map_err(|e| Error::Infeasible(format!("factorial moments do not form a pmf: {e}")))
}

/// `mu~_i / i!` with `mu~_0 = 1`.
fn scaled_factorial(fm: &FactorialMoments, i: usize) -> Rational {
    if i == 0 {
        Rational::one()
    } else {
        &fm.values[i - 1] / Rational::from_integer(factorial(i as u64))
    }
}

/// `P(S >= k)` from the full vector of factorial moments.
pub fn reliability_from_factorial(fm: &FactorialMoments, k: usize) -> Result<Rational> {
    pmf_from_factorial(fm)?;
    if k == 0 {
        return Ok(Rational::one());
    }
    if k > fm.n {
        return Ok(Rational::zero());
    }
    Ok((k..=fm.n)
        .map(|i| {
            let term = Rational::from_integer(binomial(i as u64 - 1, k as u64 - 1)) * scaled_factorial(fm, i);
            if (i - k).is_multiple_of(2) {
                term
            } else {
                -term
            }
        })
        .sum())
}

fn n_pow(n: usize, j: usize) -> Rational {
    Rational::from_integer(BigInt::from(n).pow(j as u32))
}

pub fn normalize(raw: &RawMoments) -> Result<MomentTriple> {
    if raw.values.len() < 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: raw.values.len() });
    }
    let n = raw.n;
    MomentTriple::new(n, &raw.values[0] / n_pow(n, 1), &raw.values[1] / n_pow(n, 2), &raw.values[2] / n_pow(n, 3))
}

pub fn denormalize(mt: &MomentTriple) -> RawMoments {
    let n = mt.n;
    RawMoments { n, values: vec![&mt.mu1 * n_pow(n, 1), &mt.mu2 * n_pow(n, 2), &mt.mu3 * n_pow(n, 3)] }
}

/// Normalized moments `E[(S/n)^j]` for `j = 1..=values.len()`, without the
/// triple's feasibility checks. Used for one- and two-moment queries.
pub fn normalized_prefix(raw: &RawMoments) -> Vec<Rational> {
    raw.values.iter().enumerate().map(|(j, v)| v / n_pow(raw.n, j + 1)).collect()
}

impl DeFinettiParams {
    pub fn to_raw(&self) -> Result<RawMoments> {
        Ok(factorial_to_raw(&definetti_to_factorial(self)?))
    }

    pub fn to_moment_triple(&self) -> Result<MomentTriple> {
        normalize(&self.to_raw()?)
    }
}
