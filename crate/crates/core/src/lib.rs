//! Sharp bounds on the reliability `P(S >= k)` of a discrete random variable
//! `S` on `{0, ..., n}` given its first three moments.
//!
//! All arithmetic is exact. The closed-form bounds in [`bounds`] are
//! certified against the brute-force linear program in [`oracle`].
//!
//! ```
//! use relbounds::{sharp_bounds, Distribution, MomentTriple};
//! use relbounds::numeric::rat;
//!
//! let mu = MomentTriple::of_distribution(&Distribution::uniform(7).unwrap());
//! let b = sharp_bounds(&mu, 4).unwrap();
//! assert_eq!((b.min(), b.max()), (&rat(23, 72), &rat(49, 72)));
//! ```

pub mod bounds;
pub mod decimal;
pub mod error;
pub mod geometry;
pub mod moments;
pub mod numeric;
pub mod oracle;
pub mod region;

pub use bounds::{lower_bound, sharp_bounds, sharp_bounds_batch, upper_bound, BoundsResult, Extremum};
pub use error::{Error, Result};
pub use geometry::{membership, Block, MembershipResult, MomentPolytope, Side, Simplex};
pub use moments::{BahadurParams, DeFinettiParams, Distribution, FactorialMoments, MomentTriple, RawMoments};
pub use numeric::Rational;
pub use oracle::{lp_bounds, random_distribution, verify, OracleReport, VerifyReport};
pub use region::{RegionQuery, RegionRow};
