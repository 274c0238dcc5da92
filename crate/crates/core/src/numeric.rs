//! Exact integer and rational primitives.
//!
//! Everything downstream is carried in [`Rational`] so that floors and
//! sign tests on determinants are decided exactly.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Default size of the shared Stirling triangle.
pub const STIRLING_N_MAX: usize = 64;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        Err(Error::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

/// Floor of an exact rational (rounds toward negative infinity).
pub fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Memoized triangles of Stirling numbers up to a fixed order.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    n_max: usize,
    second: Vec<Vec<BigInt>>,
    first: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    pub fn new(n_max: usize) -> Self {
        let mut second = vec![vec![BigInt::zero(); n_max + 1]; n_max + 1];
        let mut first = vec![vec![BigInt::zero(); n_max + 1]; n_max + 1];
        second[0][0] = BigInt::one();
        first[0][0] = BigInt::one();
        for j in 1..=n_max {
            for i in 1..=j {
                // S2(j,i) = i S2(j-1,i) + S2(j-1,i-1)
                second[j][i] = BigInt::from(i) * &second[j - 1][i] + &second[j - 1][i - 1];
                // s1(j,i) = s1(j-1,i-1) - (j-1) s1(j-1,i)
                first[j][i] = &first[j - 1][i - 1] - BigInt::from(j - 1) * &first[j - 1][i];
            }
        }
        StirlingTable { n_max, second, first }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn second(&self, j: usize, i: usize) -> Option<&BigInt> {
        self.second.get(j).and_then(|row| row.get(i))
    }

    pub fn first_signed(&self, j: usize, i: usize) -> Option<&BigInt> {
        self.first.get(j).and_then(|row| row.get(i))
    }
}

fn shared_table() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::new(STIRLING_N_MAX))
}

fn table_for(j: usize) -> std::borrow::Cow<'static, StirlingTable> {
    if j <= STIRLING_N_MAX {
        std::borrow::Cow::Borrowed(shared_table())
    } else {
        std::borrow::Cow::Owned(StirlingTable::new(j))
    }
}

/// Number of partitions of a `j`-set into `i` nonempty blocks.
pub fn stirling_second(j: usize, i: usize) -> BigInt {
    if i > j {
        return BigInt::zero();
    }
    table_for(j).second(j, i).cloned().unwrap_or_default()
}

/// Coefficient of `x^i` in the falling factorial `x(x-1)...(x-j+1)`.
pub fn stirling_first_signed(j: usize, i: usize) -> BigInt {
    if i > j {
        return BigInt::zero();
    }
    table_for(j).first_signed(j, i).cloned().unwrap_or_default()
}

/// `m` points in dimension `m - 1`, the rows of a bordered determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePointList {
    points: Vec<Vec<Rational>>,
}

impl AffinePointList {
    pub fn new(points: Vec<Vec<Rational>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("at least one point is required".into()));
        }
        let dim = points.len() - 1;
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
        }
        Ok(AffinePointList { points })
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.points.swap(a, b);
    }
}

/// Determinant of the matrix whose rows are `(1, y_i)`, in the listed row order.
pub fn det_affine(points: &AffinePointList) -> Rational {
    let rows: Vec<Vec<Rational>> =
        points.points.iter().map(|p| std::iter::once(Rational::one()).chain(p.iter().cloned()).collect()).collect();
    determinant(&rows)
}

/// Same as [`det_affine`] on raw slices; panics on a dimension mismatch.
pub(crate) fn det_affine_rows(points: &[&[Rational]]) -> Rational {
    let m = points.len();
    let rows: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| {
            assert_eq!(p.len() + 1, m, "affine determinant needs m points of dimension m-1");
            std::iter::once(Rational::one()).chain(p.iter().cloned()).collect()
        })
        .collect();
    determinant(&rows)
}

/// Exact determinant of a square rational matrix.
///
/// Each row is scaled to integers by the lcm of its denominators, then the
/// integer determinant is taken by fraction-free (Bareiss) elimination.
pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "determinant needs a square matrix");
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut ints: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in rows {
        let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        ints.push(row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect());
        scale *= lcm;
    }
    Rational::new(bareiss(ints), scale)
}

fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigInt::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        for r in col + 1..n {
            for c in col + 1..n {
                let v = &m[col][col] * &m[r][c] - &m[r][col] * &m[col][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[col][col].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Solves `a x = b` exactly for a matrix with at least as many rows as
/// columns. Returns `None` when the columns are dependent or the system is
/// inconsistent.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows != b.len() || rows < cols {
        return None;
    }
    let mut m: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, rhs)| row.iter().cloned().chain(std::iter::once(rhs.clone())).collect()).collect();
    for col in 0..cols {
        let pivot = (col..rows).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot, col);
        let inv = m[col][col].recip();
        for x in &mut m[col][col..] {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &factor * p;
            }
        }
    }
    if m[cols..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some(m.into_iter().take(cols).map(|row| row[cols].clone()).collect())
}

pub fn sign(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}
