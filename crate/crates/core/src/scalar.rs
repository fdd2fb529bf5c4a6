//! Scalar abstraction shared by the compiler, the LP routines and the checks.
//!
//! The compiler path runs on exact rationals so that verification is plain
//! equality. The same code also runs on `f64`/`f32` (and small fixed-width
//! ratios) for fast screening; those instantiations compare with a tolerance.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, the default scalar of the compiler.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    /// Absolute threshold below which a value counts as zero.
    fn tolerance() -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs() <= Self::tolerance()
        }
    }

    /// Equality up to the scalar's tolerance (relative for large magnitudes).
    fn near(&self, other: &Self) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let diff = (self.clone() - other.clone()).abs();
        let scale = larger(larger(self.abs(), other.abs()), Self::one());
        diff <= Self::tolerance() * scale
    }
}

fn larger<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-9
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-4
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r) as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        Self::zero()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for Ratio<i64> {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        Self::zero()
    }

    /// Panics if the value does not fit in 64-bit numerator/denominator.
    fn from_rational(r: &Rational) -> Self {
        let n = r.numer().to_i64().expect("numerator overflows i64");
        let d = r.denom().to_i64().expect("denominator overflows i64");
        Ratio::new(n, d)
    }
}

/// Lossy but overflow-safe conversion (plain `to_f64` on huge ratios yields NaN).
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let exp = 60 - (r.numer().bits() as i64 - r.denom().bits() as i64);
    let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
    if exp > 0 {
        num <<= exp as usize;
    } else {
        den <<= (-exp) as usize;
    }
    let q = (num / den).to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(-exp.clamp(-4000, 4000) as i32)
}

/// Parses `"p/q"`, integer and finite decimal forms (`"-0.25"`, `"1e-3"` is rejected).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let (neg, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return None;
        }
        let digits = format!("{int_digits}{frac_part}");
        let numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().ok()?
        };
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let value = BigRational::new(numer, denom);
        return Some(if neg { -value } else { value });
    }
    let v: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(v))
}

/// Canonical text form used in files: `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// serde adapter storing a rational as its `"p/q"` string.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("invalid rational {text:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_accepted_forms() {
        assert_eq!(parse_rational("1/2"), Some(rational(1, 2)));
        assert_eq!(parse_rational(" -3 / 6 "), Some(rational(-1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("-.5"), Some(rational(-1, 2)));
        assert_eq!(parse_rational("2."), Some(int(2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_rational("1e3"), None);
    }

    #[test]
    fn formats_integers_without_denominator() {
        assert_eq!(format_rational(&int(-4)), "-4");
        assert_eq!(format_rational(&rational(6, -8)), "-3/4");
    }

    #[test]
    fn huge_rationals_convert_to_finite_floats() {
        let big = BigRational::from_integer(num_traits::pow(BigInt::from(10), 400));
        let r = big.clone() / (big * BigInt::from(4));
        assert_eq!(rational_to_f64(&r), 0.25);
        let tiny = BigRational::new(BigInt::from(3), num_traits::pow(BigInt::from(10), 400));
        assert_eq!(rational_to_f64(&tiny), 0.0);
        let small = BigRational::new(
            num_traits::pow(BigInt::from(10), 300),
            num_traits::pow(BigInt::from(10), 310),
        );
        assert!((rational_to_f64(&small) - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn float_near_is_relative() {
        assert!(1e12f64.near(&(1e12 + 1.0)));
        assert!(!1.0f64.near(&1.001));
        assert!(rational(1, 3).near(&rational(2, 6)));
    }
}
