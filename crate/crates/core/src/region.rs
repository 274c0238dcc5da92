//! Admissible `(w1, R_{k,n})` regions with the Bahadur correlations held fixed.
//!
//! With `rho2` and `rho3` fixed, `w1` cannot range over all of `[0, 1]`; the
//! feasible set is found on a grid and its endpoints refined by bisection on
//! exact membership. With only `rho2` fixed the bounds come from the
//! two-moment oracle, and with nothing fixed from the one-moment oracle.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bounds::sharp_bounds_with;
use crate::decimal::format_sig;
use crate::error::{Error, Result};
use crate::geometry::{MembershipResult, MomentPolytope};
use crate::moments::{bahadur_to_definetti, BahadurParams, DeFinettiParams, MomentTriple};
use crate::numeric::Rational;
use crate::oracle::{lp_bounds_prefix, BasicSolutions};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionRow {
    pub w1: Rational,
    /// `(min, max)` of `R_{k,n}`; `None` when `w1` is infeasible.
    pub bounds: Option<(Rational, Rational)>,
}

impl RegionRow {
    pub fn feasible(&self) -> bool {
        self.bounds.is_some()
    }

    pub fn csv_line(&self) -> String {
        match &self.bounds {
            Some((lo, hi)) => {
                format!("{},{},{},true", format_sig(&self.w1, 12), format_sig(lo, 12), format_sig(hi, 12))
            }
            None => format!("{},,,false", format_sig(&self.w1, 12)),
        }
    }
}

pub const CSV_HEADER: &str = "w1,min,max,feasible";

pub fn region_csv(rows: &[RegionRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

enum Moments {
    Three(MomentTriple),
    Prefix(Vec<Rational>),
}

#[derive(Debug, Clone)]
pub struct RegionQuery {
    n: usize,
    k: usize,
    rho2: Option<Rational>,
    rho3: Option<Rational>,
    polytope: Option<MomentPolytope>,
}

impl RegionQuery {
    pub fn new(n: usize, k: usize, rho2: Option<Rational>, rho3: Option<Rational>) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
        }
        if rho3.is_some() && rho2.is_none() {
            return Err(Error::InvalidArgument("fixing rho3 requires rho2".into()));
        }
        let needed = 1 + usize::from(rho2.is_some()) + usize::from(rho3.is_some());
        if needed > n {
            return Err(Error::InvalidArgument(format!("{needed} moments need n >= {needed}")));
        }
        let polytope = if rho3.is_some() { Some(MomentPolytope::new(n)?) } else { None };
        Ok(RegionQuery { n, k, rho2, rho3, polytope })
    }

    fn moments(&self, w1: &Rational) -> Option<Moments> {
        if w1.is_negative() || *w1 > Rational::one() {
            return None;
        }
        let n = self.n;
        match (&self.rho2, &self.rho3) {
            (None, _) => Some(Moments::Prefix(vec![w1.clone()])),
            (Some(rho2), None) => {
                if w1.is_zero() || w1.is_one() {
                    return None;
                }
                let w2 = w1 * w1 + rho2 * w1 * (Rational::one() - w1);
                // E[S] = n w1, E[S(S-1)] = n(n-1) w2, E[S^2] = E[S(S-1)] + E[S]
                let nn = Rational::from_integer(BigInt::from(n));
                let raw2 = &nn * (&nn - Rational::one()) * w2 + &nn * w1;
                Some(Moments::Prefix(vec![w1.clone(), raw2 / (&nn * &nn)]))
            }
            (Some(rho2), Some(rho3)) => {
                let b = BahadurParams { n, w1: w1.clone(), rho2: rho2.clone(), rho3: rho3.clone() };
                let w: DeFinettiParams = bahadur_to_definetti(&b).ok()?.value;
                w.to_moment_triple().ok().map(Moments::Three)
            }
        }
    }

    pub fn is_feasible(&self, w1: &Rational) -> bool {
        match self.moments(w1) {
            None => false,
            Some(Moments::Three(mu)) => {
                let poly = self.polytope.as_ref().expect("built for three moments");
                !matches!(poly.membership(&mu), Ok(MembershipResult::Outside(_)) | Err(_))
            }
            Some(Moments::Prefix(p)) => BasicSolutions::enumerate(self.n, &p).is_ok(),
        }
    }

    pub fn row(&self, w1: &Rational) -> Result<RegionRow> {
        let bounds = match self.moments(w1) {
            None => None,
            Some(Moments::Three(mu)) => {
                let poly = self.polytope.as_ref().expect("built for three moments");
                match sharp_bounds_with(poly, &mu, self.k) {
                    Ok(b) => Some((b.min().clone(), b.max().clone())),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                }
            }
            Some(Moments::Prefix(p)) => match lp_bounds_prefix(self.n, &p, self.k) {
                Ok(rep) => Some((rep.min, rep.max)),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            },
        };
        Ok(RegionRow { w1: w1.clone(), bounds })
    }

    /// Rows for `w1 = j / (steps - 1)`, `j = 0..steps`.
    pub fn sweep(&self, steps: usize) -> Result<Vec<RegionRow>> {
        grid(steps)?.iter().map(|w1| self.row(w1)).collect()
    }

    /// Feasible `w1` endpoints, located on the grid and refined by bisection
    /// until the bracketing interval is no wider than `tol`. Each endpoint is
    /// the feasible side of its final bracket. `None` if no grid point is
    /// feasible.
    pub fn feasible_interval(&self, steps: usize, tol: &Rational) -> Result<Option<(Rational, Rational)>> {
        if !tol.is_positive() {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let points = grid(steps)?;
        let flags: Vec<bool> = points.iter().map(|w| self.is_feasible(w)).collect();
        let (Some(first), Some(last)) = (flags.iter().position(|&f| f), flags.iter().rposition(|&f| f)) else {
            return Ok(None);
        };
        let lo = if first == 0 {
            points[0].clone()
        } else {
            self.bisect(points[first - 1].clone(), points[first].clone(), tol)
        };
        let hi = if last + 1 == points.len() {
            points[last].clone()
        } else {
            self.bisect(points[last + 1].clone(), points[last].clone(), tol)
        };
        Ok(Some((lo, hi)))
    }

    fn bisect(&self, mut infeasible: Rational, mut feasible: Rational, tol: &Rational) -> Rational {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        while (&feasible - &infeasible).abs() > *tol {
            let mid = (&feasible + &infeasible) * &half;
            if self.is_feasible(&mid) {
                feasible = mid;
            } else {
                infeasible = mid;
            }
        }
        feasible
    }
}

fn grid(steps: usize) -> Result<Vec<Rational>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("a sweep needs at least 2 steps".into()));
    }
    let last = BigInt::from(steps - 1);
    Ok((0..steps).map(|j| Rational::new(BigInt::from(j), last.clone())).collect())
}
