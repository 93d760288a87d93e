//! Exact rational scalars and the handful of conversions the rest of the crate needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational scalar used for every coordinate in the crate.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // Very large numerators/denominators: scale both down before dividing.
            let n = x.numer();
            let d = x.denom();
            let shift = n.bits().max(d.bits()).saturating_sub(900);
            let n = (n >> shift).to_f64().unwrap_or(0.0);
            let d = (d >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Exact conversion of a finite `f64` into a rational.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Rational approximation of `x` with denominator `2^bits`, rounded to nearest.
pub fn round_dyadic(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round() as i64;
    Q::new(BigInt::from(n), BigInt::from(1u64 << bits))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal '{}'", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `"p"`, `"p/q"` or a finite decimal like `"-0.125"` exactly.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((a, b)) = t.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| err())?;
        let d: BigInt = b.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let mut n: BigInt = digits.parse().map_err(|_| err())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Q::new(n, d));
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Q::from_integer(n))
}

/// Canonical `"p/q"` (or `"p"` for integers) rendering.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Square root of a nonnegative rational when it is itself rational.
pub fn exact_sqrt(x: &Q) -> Option<Q> {
    let n = exact_isqrt(x.numer())?;
    let d = exact_isqrt(x.denom())?;
    Some(Q::new(n, d))
}

/// Square root as an exact rational when possible, otherwise a dyadic
/// under-approximation with `bits` fractional bits. The flag reports exactness.
pub fn sqrt_q(x: &Q, bits: u32) -> (Q, bool) {
    if let Some(r) = exact_sqrt(x) {
        return (r, true);
    }
    // sqrt(n/d) = sqrt(n*d)/d
    let nd = x.numer() * x.denom();
    let scale = BigInt::one() << (2 * bits as usize);
    let r = (nd * scale).sqrt();
    let den = x.denom() * (BigInt::one() << bits as usize);
    (Q::new(r, den), false)
}

pub fn sqrt_f64(x: &Q) -> f64 {
    to_f64(x).max(0.0).sqrt()
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/6").unwrap(), qf(1, 2));
        assert_eq!(parse_q("-7").unwrap(), q(-7));
        assert_eq!(parse_q("-0.125").unwrap(), qf(-1, 8));
        assert_eq!(parse_q("0.5").unwrap(), qf(1, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert_eq!(format_q(&qf(2, 4)), "1/2");
        assert_eq!(format_q(&q(5)), "5");
    }

    #[test]
    fn square_roots() {
        assert_eq!(exact_sqrt(&qf(9, 4)), Some(qf(3, 2)));
        assert_eq!(exact_sqrt(&q(2)), None);
        let (r, exact) = sqrt_q(&q(2), 40);
        assert!(!exact);
        assert!((to_f64(&r) - 2f64.sqrt()).abs() < 1e-11);
        assert!(&r * &r <= q(2));
    }
}
