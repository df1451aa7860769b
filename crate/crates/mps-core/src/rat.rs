//! Arbitrary-precision rational scalars and their `"p/q"` string form.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// The coefficient field: exact rationals with big-integer parts.
pub type Rat = BigRational;

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// p/q as a rational; panics if q = 0.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    acc
}

pub fn factorial_rat(n: u32) -> Rat {
    Rat::from_integer(factorial(n))
}

/// Canonical string form: reduced, positive denominator, `"p"` when the
/// denominator is one, `"p/q"` otherwise. Never a float.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p"` or `"p/q"` with optional leading sign. Rejects zero
/// denominators, decimal points and anything else non-integral.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = num_str
        .parse()
        .map_err(|_| format!("invalid integer numerator `{num_str}`"))?;
    let q: BigInt = den_str
        .parse()
        .map_err(|_| format!("invalid integer denominator `{den_str}`"))?;
    if q.is_zero() {
        return Err("zero denominator".to_string());
    }
    Ok(Rat::new(p, q))
}

/// True when the denominator is positive and gcd(p, q) = 1; `Ratio`
/// maintains this on construction, the check exists for test assertions.
pub fn is_canonical(r: &Rat) -> bool {
    r.denom().is_positive() && num::integer::gcd(r.numer().clone(), r.denom().clone()).is_one()
}
