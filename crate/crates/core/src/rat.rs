//! Exact rational scalars and their text form.
//!
//! Rationals travel through every wire format as strings of the form
//! `"p/q"` (or plain `"p"` when the denominator is one).

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number with a normalized, positive denominator.
pub type Rat = BigRational;

/// Complex float used for all numerical evaluation.
pub type CF = Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer `{0}` in rational literal")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`; whitespace around the parts is ignored.
pub fn parse_rat(text: &str) -> Result<Rat, ParseRatError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRatError::Empty);
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let parse_int = |s: &str| {
        // BigInt accepts a leading '+', keep that but reject anything exotic.
        if s.is_empty() || !s.trim_start_matches(['+', '-']).bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRatError::BadInteger(s.to_string()));
        }
        BigInt::from_str(s).map_err(|_| ParseRatError::BadInteger(s.to_string()))
    };
    let n = parse_int(num)?;
    let d = match den {
        Some(d) => parse_int(d)?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(ParseRatError::ZeroDenominator(text.to_string()));
    }
    Ok(Rat::new(n, d))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rat(value: &Rat) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn rat_to_f64(value: &Rat) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Huge numerators or denominators: fall back to a scaled division.
        let n = value.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = value.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rat_to_cf(value: &Rat) -> CF {
    CF::new(rat_to_f64(value), 0.0)
}

/// Exact m-th root of a rational, when one exists.
///
/// Negative inputs have a real root only for odd `m`.
pub fn rat_nth_root(value: &Rat, m: u32) -> Option<Rat> {
    if m == 0 {
        return None;
    }
    if value.is_zero() {
        return Some(Rat::zero());
    }
    if value.is_negative() && m.is_multiple_of(2) {
        return None;
    }
    let root_int = |x: &BigInt| -> Option<BigInt> {
        let mag = x.abs();
        let r = mag.nth_root(m);
        (num_traits::pow(r.clone(), m as usize) == mag).then_some(r)
    };
    let n = root_int(value.numer())?;
    let d = root_int(value.denom())?;
    let n = if value.is_negative() { -n } else { n };
    Some(Rat::new(n, d))
}
