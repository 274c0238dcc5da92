//! Decimal edges of the exact core: parsing literals, rendering decimals,
//! and the controlled-precision square root used by Bahadur conversions.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::Rational;

/// Absolute error bound on every approximated 3/2-power.
pub fn approximation_tolerance() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10).pow(30))
}

/// Parses `p/q`, an integer, or a decimal literal (with optional exponent)
/// into an exact rational. `0.2` becomes exactly `1/5`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p).map_err(|_| bad())?;
        let q = parse_rational(q).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * ten.pow(scale as u32))
    } else {
        Rational::new(numer, ten.pow((-scale) as u32))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Renders `x` with `digits` significant digits, rounding half away from zero.
/// No exponent notation; trailing zeros after the point are trimmed.
pub fn format_sig(x: &Rational, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let ten = BigInt::from(10);
    let abs = x.abs();
    // exponent e with 10^e <= |x| < 10^(e+1)
    let mut e: i64 = (abs.numer().bits() as i64 - abs.denom().bits() as i64) * 30103 / 100000;
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }
    let mut shift = digits as i64 - 1 - e;
    let mut q = round_half_up(&(&abs * pow10(shift)));
    if q >= ten.pow(digits) {
        shift -= 1;
        q = round_half_up(&(&abs * pow10(shift)));
    }
    let body = q.to_string();
    let text = if shift <= 0 {
        format!("{}{}", body, "0".repeat((-shift) as usize))
    } else {
        let shift = shift as usize;
        let padded = if body.len() <= shift { format!("{}{}", "0".repeat(shift - body.len() + 1), body) } else { body };
        let (int_part, frac_part) = padded.split_at(padded.len() - shift);
        let frac_part = frac_part.trim_end_matches('0');
        if frac_part.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        }
    };
    if x.is_negative() {
        format!("-{text}")
    } else {
        text
    }
}

fn pow10(e: i64) -> Rational {
    let ten = BigInt::from(10);
    if e >= 0 {
        Rational::from_integer(ten.pow(e as u32))
    } else {
        Rational::new(BigInt::one(), ten.pow((-e) as u32))
    }
}

fn round_half_up(x: &Rational) -> BigInt {
    (x + Rational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

/// Exact square root when `x` is the square of a rational.
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let p = x.numer().sqrt();
    let q = x.denom().sqrt();
    (&p * &p == *x.numer() && &q * &q == *x.denom()).then(|| Rational::new(p, q))
}

/// A rational `s` with `|s - sqrt(x)| <= tol` (exact when possible).
pub fn sqrt_within(x: &Rational, tol: &Rational) -> Result<Rational> {
    if x.is_negative() {
        return Err(Error::InvalidArgument("square root of a negative number".into()));
    }
    if let Some(root) = exact_sqrt(x) {
        return Ok(root);
    }
    if !tol.is_positive() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let ten = BigInt::from(10);
    let mut d = 0u32;
    while pow10(-(d as i64)) > *tol {
        d += 1;
    }
    let scale = ten.pow(d);
    let scaled = x * Rational::from_integer(&scale * &scale);
    let root = scaled.floor().to_integer().sqrt();
    Ok(Rational::new(root, scale))
}

/// `x^(3/2)` for `x >= 0`, exact when `x` is a rational square; the flag
/// reports whether the value is exact.
pub fn pow_three_halves(x: &Rational, tol: &Rational) -> Result<(Rational, bool)> {
    if let Some(root) = exact_sqrt(x) {
        return Ok((x * root, true));
    }
    // |x s - x sqrt(x)| = x |s - sqrt(x)|, so tighten by x when x > 1
    let tighter = if *x > Rational::one() { tol / x } else { tol.clone() };
    Ok((x * sqrt_within(x, &tighter)?, false))
}

pub fn to_f64(x: &Rational) -> f64 {
    format_sig(x, 17).parse().unwrap_or(f64::NAN)
}
