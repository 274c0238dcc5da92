//! Sharp bounds on `R_{k,n} = P(S >= k)` given `(mu1, mu2, mu3)` of `S/n`.
//!
//! The maximum is read off the upper subdivision of `M_n` (apex `v_k`) and
//! the minimum off the lower one (apex `v_{k-1}`). The tetrahedron holding
//! the query is found in closed form: tetrahedra sharing the edge
//! `<v0, v_apex>` are indexed by `i*`, those sharing `<v_apex, v_n>` by `t*`.
//! The barycentric weights of the query in that tetrahedron are the unique
//! extremal distribution. Exact ties, vanishing denominators and anything
//! the closed form cannot place fall back to a linear scan.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::decimal::format_sig;
use crate::error::{Error, Result};
use crate::geometry::{barycentric_in, subdivision, Block, MembershipResult, MomentPolytope, Side, Simplex};
use crate::moments::{Distribution, MomentTriple};
use crate::numeric::{floor, Rational};

/// Outcome of the floor formulas for `i*` and `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarIndex {
    /// Admissible index; the quotient is not an integer.
    Index(usize),
    /// The quotient is exactly this admissible integer, so the query lies on
    /// a face shared by two neighbouring tetrahedra.
    Tie(usize),
    /// Zero denominator, or the index falls outside the family's range.
    Undefined,
}

fn r(x: usize) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

fn ri(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// `n(n mu3 - a mu2) / (n mu2 - a mu1)`, or `None` on a zero denominator.
pub fn i_star_quotient(mu: &MomentTriple, apex: usize) -> Option<Rational> {
    let (n, a) = (r(mu.n()), r(apex));
    let den = &n * mu.mu2() - &a * mu.mu1();
    if den.is_zero() {
        return None;
    }
    Some(&n * (&n * mu.mu3() - &a * mu.mu2()) / den)
}

/// `n(n mu3 - (a+n) mu2 + a mu1) / (n mu2 - (a+n) mu1 + a)`, or `None` on a
/// zero denominator.
pub fn t_star_quotient(mu: &MomentTriple, apex: usize) -> Option<Rational> {
    let (n, a) = (r(mu.n()), r(apex));
    let an = &a + &n;
    let den = &n * mu.mu2() - &an * mu.mu1() + &a;
    if den.is_zero() {
        return None;
    }
    Some(&n * (&n * mu.mu3() - &an * mu.mu2() + &a * mu.mu1()) / den)
}

fn star_index(q: Option<Rational>, admissible: impl Fn(i64) -> bool) -> StarIndex {
    let Some(q) = q else {
        return StarIndex::Undefined;
    };
    let Some(idx) = floor(&q).to_i64() else {
        return StarIndex::Undefined;
    };
    if !admissible(idx) {
        StarIndex::Undefined
    } else if q.is_integer() {
        StarIndex::Tie(idx as usize)
    } else {
        StarIndex::Index(idx as usize)
    }
}

/// `i*` for the tetrahedra `<v0, v_apex, v_i, v_i+1>`, admissible in
/// `{1..apex-2} ∪ {apex+1..n-1}` (none when the apex is `v0`).
pub fn locate_i_star(mu: &MomentTriple, apex: usize) -> StarIndex {
    let (a, n) = (apex as i64, mu.n() as i64);
    star_index(i_star_quotient(mu, apex), |i| a != 0 && ((1..=a - 2).contains(&i) || (a + 1..=n - 1).contains(&i)))
}

/// `t*` for the tetrahedra `<v_apex, v_t, v_t+1, v_n>`, admissible in
/// `{0..apex-2} ∪ {apex+1..n-2}` (none when the apex is `v_n`).
pub fn locate_t_star(mu: &MomentTriple, apex: usize) -> StarIndex {
    let (a, n) = (apex as i64, mu.n() as i64);
    star_index(t_star_quotient(mu, apex), |t| a != n && ((0..=a - 2).contains(&t) || (a + 1..=n - 2).contains(&t)))
}

/// Masses on four atoms as produced by the closed forms; possibly improper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub support: [usize; 4],
    pub masses: [Rational; 4],
}

impl Candidate {
    /// All masses in `[0, 1]`. They sum to one by construction.
    pub fn is_proper(&self) -> bool {
        self.masses.iter().all(|m| !m.is_negative() && *m <= Rational::one())
    }

    pub fn mass_at(&self, atom: usize) -> Rational {
        self.support.iter().zip(&self.masses).filter(|(s, _)| **s == atom).map(|(_, m)| m.clone()).sum()
    }

    pub fn to_distribution(&self, n: usize) -> Result<Distribution> {
        let atoms: Vec<(usize, Rational)> = self.support.iter().copied().zip(self.masses.iter().cloned()).collect();
        Distribution::from_atoms(n, &atoms)
    }
}

/// Weights on `{0, apex, i, i+1}` for the query in `<v0, v_apex, v_i, v_i+1>`.
pub fn extremal_type1(mu: &MomentTriple, apex: usize, i: usize) -> Result<Candidate> {
    let (a, i_, n) = (apex as i64, i as i64, mu.n() as i64);
    let den_a = a * (a - i_) * (a - i_ - 1);
    let den_i = i_ * (a - i_);
    let den_i1 = (i_ + 1) * (a - i_ - 1);
    if den_a == 0 || den_i == 0 || den_i1 == 0 {
        return Err(Error::ZeroDenominator { apex, index: i });
    }
    let (m1, m2, m3) = (mu.mu1(), mu.mu2(), mu.mu3());
    let nn = ri(n);
    let n2m3 = ri(n * n) * m3;
    let pi_a = &nn * (&n2m3 - ri((2 * i_ + 1) * n) * m2 + ri(i_ * (i_ + 1)) * m1) / ri(den_a);
    let pi_i = &nn * (&n2m3 - ri((a + i_ + 1) * n) * m2 + ri(a * (i_ + 1)) * m1) / ri(den_i);
    let pi_i1 = -&nn * (&n2m3 - ri((a + i_) * n) * m2 + ri(a * i_) * m1) / ri(den_i1);
    let pi_0 = Rational::one() - &pi_a - &pi_i - &pi_i1;
    Ok(Candidate { support: [0, apex, i, i + 1], masses: [pi_0, pi_a, pi_i, pi_i1] })
}

/// Weights on `{apex, t, t+1, n}` for the query in `<v_apex, v_t, v_t+1, v_n>`.
pub fn extremal_type2(mu: &MomentTriple, apex: usize, t: usize) -> Result<Candidate> {
    let (a, t_, n) = (apex as i64, t as i64, mu.n() as i64);
    let den_a = (a - n) * (a - t_) * (a - t_ - 1);
    let den_t = (a - t_) * (n - t_);
    let den_t1 = (a - t_ - 1) * (n - t_ - 1);
    if den_a == 0 || den_t == 0 || den_t1 == 0 {
        return Err(Error::ZeroDenominator { apex, index: t });
    }
    let (m1, m2, m3) = (mu.mu1(), mu.mu2(), mu.mu3());
    let nn = ri(n);
    let n2m3 = ri(n * n) * m3;
    let p_a = &nn
        * (&n2m3 - ri(n * (n + 2 * t_ + 1)) * m2 + ri(t_ * t_ + 2 * n * t_ + n + t_) * m1 - ri((t_ + 1) * t_))
        / ri(den_a);
    let p_t = -&nn
        * (&n2m3 - ri(n * (n + a + t_ + 1)) * m2 + ri(a + n + a * n + a * t_ + n * t_) * m1 - ri(a + a * t_))
        / ri(den_t);
    let p_t1 = &nn * (&n2m3 - ri(n * (a + n + t_)) * m2 + ri(n * t_ + a * n + a * t_) * m1 - ri(a * t_)) / ri(den_t1);
    let p_n = Rational::one() - &p_a - &p_t - &p_t1;
    Ok(Candidate { support: [apex, t, t + 1, mu.n()], masses: [p_a, p_t, p_t1, p_n] })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedSimplex {
    pub simplex: Simplex,
    /// `i*` for blocks 1 and 2, `t*` for blocks 3 and 4.
    pub star_index: usize,
    pub side: Side,
    pub block: Block,
    /// Found by the closed-form index rather than the scan.
    pub fast_path: bool,
}

/// One side of the bound: its value, the distribution attaining it, and
/// where the query was located (absent for boundary queries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremum {
    pub value: Rational,
    pub distribution: Distribution,
    pub located: Option<LocatedSimplex>,
}

impl Extremum {
    pub fn block(&self) -> Option<Block> {
        self.located.as_ref().map(|l| l.block)
    }
}

/// First tetrahedron of the subdivision from `v_apex` whose barycentric
/// weights for the query are all nonnegative.
pub fn locate_by_scan(mu: &MomentTriple, apex: usize, side: Side) -> Result<LocatedSimplex> {
    let poly = MomentPolytope::new(mu.n())?;
    scan(&poly, mu, apex, side).map(|(located, _)| located)
}

fn scan(poly: &MomentPolytope, mu: &MomentTriple, apex: usize, side: Side) -> Result<(LocatedSimplex, Distribution)> {
    let n = mu.n();
    for simplex in subdivision(apex, n, side) {
        let weights = barycentric_in(poly, &simplex.vertices, mu)?;
        if weights.iter().all(|w| !w.is_negative()) {
            let (block, star_index) = Block::classify(&simplex.vertices, apex, n)
                .ok_or_else(|| Error::Internal(format!("unlabelled subdivision simplex {simplex}")))?;
            let atoms: Vec<(usize, Rational)> = simplex.vertices.iter().copied().zip(weights).collect();
            let dist = Distribution::from_atoms(n, &atoms)?;
            return Ok((LocatedSimplex { simplex, star_index, side, block, fast_path: false }, dist));
        }
    }
    Err(Error::NoContainingSimplex)
}

/// Closed-form location with scan fallback.
fn locate(poly: &MomentPolytope, mu: &MomentTriple, apex: usize, side: Side) -> Result<(LocatedSimplex, Distribution)> {
    let n = mu.n();
    let mut candidates = Vec::with_capacity(2);
    if let StarIndex::Index(i) = locate_i_star(mu, apex) {
        let block = if i < apex { Block::One } else { Block::Two };
        let vertices = [0, apex, i, i + 1];
        let vertices = if block == Block::One { [0, i, i + 1, apex] } else { vertices };
        candidates.push((extremal_type1(mu, apex, i)?, Simplex { vertices, side, block }, i));
    }
    if let StarIndex::Index(t) = locate_t_star(mu, apex) {
        let block = if t < apex { Block::Three } else { Block::Four };
        let vertices = if block == Block::Three { [t, t + 1, apex, n] } else { [apex, t, t + 1, n] };
        candidates.push((extremal_type2(mu, apex, t)?, Simplex { vertices, side, block }, t));
    }
    for (candidate, simplex, star_index) in candidates {
        if candidate.is_proper() {
            let block = simplex.block;
            let located = LocatedSimplex { simplex, star_index, side, block, fast_path: true };
            return Ok((located, candidate.to_distribution(n)?));
        }
    }
    scan(poly, mu, apex, side)
}

/// Block-wise readout of the maximum (apex `v_k`).
fn upper_readout(block: Block, star: usize, k: usize, n: usize, d: &Distribution) -> Rational {
    match block {
        Block::One => d.mass(k),
        Block::Two => d.mass(k) + d.mass(star) + d.mass(star + 1),
        Block::Three => d.mass(k) + d.mass(n),
        Block::Four => Rational::one(),
    }
}

/// Block-wise readout of the minimum (apex `v_{k-1}`).
fn lower_readout(block: Block, star: usize, n: usize, d: &Distribution) -> Rational {
    match block {
        Block::One => Rational::zero(),
        Block::Two => d.mass(star) + d.mass(star + 1),
        Block::Three => d.mass(n),
        Block::Four => d.mass(star) + d.mass(star + 1) + d.mass(n),
    }
}

enum Query {
    Boundary(Distribution),
    Interior,
}

fn classify_query(poly: &MomentPolytope, mu: &MomentTriple, k: usize) -> Result<Query> {
    if k > mu.n() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {}", mu.n())));
    }
    match poly.membership(mu)? {
        MembershipResult::Outside(facet) => Err(Error::Infeasible(format!(
            "({mu}) lies outside the moment polytope for n = {}, beyond facet <v{}, v{}, v{}>",
            mu.n(),
            facet[0],
            facet[1],
            facet[2]
        ))),
        MembershipResult::Boundary(face) => {
            let weights = poly.weights(&face, &mu.coords())?;
            let atoms: Vec<(usize, Rational)> = face.into_iter().zip(weights).collect();
            Ok(Query::Boundary(Distribution::from_atoms(mu.n(), &atoms)?))
        }
        MembershipResult::Interior => Ok(Query::Interior),
    }
}

fn upper_with(poly: &MomentPolytope, mu: &MomentTriple, k: usize) -> Result<Extremum> {
    match classify_query(poly, mu, k)? {
        Query::Boundary(d) => Ok(Extremum { value: d.tail_probability(k), distribution: d, located: None }),
        Query::Interior => {
            let (located, d) = locate(poly, mu, k, Side::Upper)?;
            let value = upper_readout(located.block, located.star_index, k, mu.n(), &d);
            Ok(Extremum { value, distribution: d, located: Some(located) })
        }
    }
}

fn lower_with(poly: &MomentPolytope, mu: &MomentTriple, k: usize) -> Result<Extremum> {
    match classify_query(poly, mu, k)? {
        Query::Boundary(d) => Ok(Extremum { value: d.tail_probability(k), distribution: d, located: None }),
        Query::Interior if k == 0 => {
            // P(S >= 0) = 1 for every distribution; any representing one will do
            let (located, d) = locate(poly, mu, 0, Side::Lower)?;
            Ok(Extremum { value: Rational::one(), distribution: d, located: Some(located) })
        }
        Query::Interior => {
            let (located, d) = locate(poly, mu, k - 1, Side::Lower)?;
            let value = lower_readout(located.block, located.star_index, mu.n(), &d);
            Ok(Extremum { value, distribution: d, located: Some(located) })
        }
    }
}

pub fn upper_bound(mu: &MomentTriple, k: usize) -> Result<Extremum> {
    upper_with(&MomentPolytope::new(mu.n())?, mu, k)
}

pub fn lower_bound(mu: &MomentTriple, k: usize) -> Result<Extremum> {
    lower_with(&MomentPolytope::new(mu.n())?, mu, k)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsResult {
    pub k: usize,
    pub query: MomentTriple,
    pub lower: Extremum,
    pub upper: Extremum,
    /// The query lies on the boundary of `M_n`, so its distribution is unique.
    pub degenerate: bool,
}

impl BoundsResult {
    pub fn n(&self) -> usize {
        self.query.n()
    }

    pub fn min(&self) -> &Rational {
        &self.lower.value
    }

    pub fn max(&self) -> &Rational {
        &self.upper.value
    }

    pub fn argmin(&self) -> &Distribution {
        &self.lower.distribution
    }

    pub fn argmax(&self) -> &Distribution {
        &self.upper.distribution
    }

    pub fn min_block(&self) -> Option<Block> {
        self.lower.block()
    }

    pub fn max_block(&self) -> Option<Block> {
        self.upper.block()
    }
}

fn block_text(b: Option<Block>) -> String {
    b.map_or_else(|| "-".to_string(), |b| b.to_string())
}

/// Stable `key: value` record.
impl fmt::Display for BoundsResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.n())?;
        writeln!(f, "k: {}", self.k)?;
        writeln!(f, "mu: {}", self.query)?;
        writeln!(f, "min: {} ({})", self.min(), format_sig(self.min(), 12))?;
        writeln!(f, "max: {} ({})", self.max(), format_sig(self.max(), 12))?;
        writeln!(f, "argmin: {}", self.argmin())?;
        writeln!(f, "argmax: {}", self.argmax())?;
        writeln!(f, "min_block: {}", block_text(self.min_block()))?;
        writeln!(f, "max_block: {}", block_text(self.max_block()))?;
        writeln!(f, "degenerate: {}", self.degenerate)
    }
}

pub fn sharp_bounds(mu: &MomentTriple, k: usize) -> Result<BoundsResult> {
    let poly = MomentPolytope::new(mu.n())?;
    sharp_bounds_with(&poly, mu, k)
}

/// [`sharp_bounds`] against a prebuilt polytope for the query's `n`.
pub fn sharp_bounds_with(poly: &MomentPolytope, mu: &MomentTriple, k: usize) -> Result<BoundsResult> {
    let upper = upper_with(poly, mu, k)?;
    let lower = lower_with(poly, mu, k)?;
    let degenerate = upper.located.is_none();
    if lower.value > upper.value {
        return Err(Error::Internal(format!("min {} exceeds max {}", lower.value, upper.value)));
    }
    for ext in [&lower, &upper] {
        if MomentTriple::of_distribution(&ext.distribution) != *mu {
            return Err(Error::Internal(format!("extremal distribution {} misses the query", ext.distribution)));
        }
    }
    Ok(BoundsResult { k, query: mu.clone(), lower, upper, degenerate })
}

/// Evaluates independent `(mu, k)` queries in parallel, preserving order.
pub fn sharp_bounds_batch(queries: &[(MomentTriple, usize)]) -> Vec<Result<BoundsResult>> {
    queries.par_iter().map(|(mu, k)| sharp_bounds(mu, *k)).collect()
}
