//! Non-negative arbitrary-precision rationals.
//!
//! `ExactRational` carries the real-valued side of every comparison: exact
//! trajectories, preimages, and the oracle that finite-precision runs are
//! measured against. Parsing goes straight from decimal text to a rational
//! so no host floating point sits between the user's numeral and the value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A reduced, non-negative rational number.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn from_integer(n: u64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_biguint(n: BigUint) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numerator / denominator`, reduced.
    pub fn new(numerator: BigUint, denominator: BigUint) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(ExactRational(BigRational::new(
            BigInt::from(numerator),
            BigInt::from(denominator),
        )))
    }

    pub fn from_ratio(numerator: u64, denominator: u64) -> Result<Self> {
        Self::new(BigUint::from(numerator), BigUint::from(denominator))
    }

    /// Wraps an already reduced fraction without a gcd pass.
    ///
    /// Callers must guarantee `gcd(numerator, denominator) = 1` and a
    /// non-zero denominator.
    pub(crate) fn from_reduced_parts(numerator: BigUint, denominator: BigUint) -> Self {
        debug_assert!(!denominator.is_zero());
        debug_assert!(numerator.gcd(&denominator).is_one() || numerator.is_zero());
        ExactRational(BigRational::new_raw(
            BigInt::from(numerator),
            BigInt::from(denominator),
        ))
    }

    pub(crate) fn from_big(value: BigRational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Negative(value.to_string()));
        }
        Ok(ExactRational(value))
    }

    /// The exact value of a finite binary64 number.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Malformed(x.to_string()));
        }
        // from_float is exact for finite inputs; -0.0 maps to zero.
        let r = BigRational::from_float(x).ok_or_else(|| Error::Malformed(x.to_string()))?;
        Self::from_big(r)
    }

    pub fn from_f32(x: f32) -> Result<Self> {
        Self::from_f64(f64::from(x))
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numerator(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denominator(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.0 > self.0 {
            None
        } else {
            Some(ExactRational(&self.0 - &other.0))
        }
    }

    pub fn abs_diff(&self, other: &Self) -> Self {
        ExactRational((&self.0 - &other.0).abs())
    }

    pub fn double(&self) -> Self {
        ExactRational(&self.0 * BigInt::from(2u8))
    }

    pub fn half(&self) -> Self {
        ExactRational(&self.0 / BigInt::from(2u8))
    }

    /// `x · 2^k`.
    pub fn shl(&self, k: u32) -> Self {
        ExactRational(&self.0 * BigRational::from_integer(BigInt::one() << k as usize))
    }

    /// `floor(x · 2^k)`.
    pub fn floor_scaled(&self, k: u32) -> BigUint {
        let scaled = self.0.numer() << k as usize;
        scaled.div_floor(self.0.denom()).magnitude().clone()
    }

    /// Nearest binary64 value (ties to even).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Nearest binary32 value (ties to even), rounded directly from the
    /// rational so there is no double rounding through binary64.
    pub fn to_f32(&self) -> f32 {
        self.0.to_f32().unwrap_or(f32::INFINITY)
    }

    /// Exact decimal expansion when the denominator has only factors 2 and 5.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.denominator();
        let two = BigUint::from(2u8);
        let five = BigUint::from(5u8);
        let (mut twos, mut fives) = (0usize, 0usize);
        while den.is_even() && !den.is_zero() {
            den >>= 1;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let digits = twos.max(fives);
        // value * 10^digits is an integer.
        let scale = num_traits::pow(two, digits - twos) * num_traits::pow(five, digits - fives);
        let (int_part, frac_part) = if digits == 0 {
            (self.numerator(), BigUint::zero())
        } else {
            let scaled = self.numerator() * scale;
            let ten_pow = num_traits::pow(BigUint::from(10u8), digits);
            (&scaled / &ten_pow, &scaled % &ten_pow)
        };
        Some(render_decimal(&int_part, &frac_part, digits))
    }

    /// Decimal expansion truncated toward zero after `digits` fractional digits.
    pub fn to_decimal_truncated(&self, digits: usize) -> String {
        let ten_pow = num_traits::pow(BigUint::from(10u8), digits);
        let numer = self.numerator();
        let denom = self.denominator();
        let int_part = &numer / &denom;
        let frac_part = ((&numer % &denom) * &ten_pow) / &denom;
        render_decimal(&int_part, &frac_part, digits)
    }
}

fn render_decimal(int_part: &BigUint, frac_part: &BigUint, digits: usize) -> String {
    if digits == 0 || frac_part.is_zero() {
        return int_part.to_string();
    }
    let frac = format!("{:0>width$}", frac_part.to_string(), width = digits);
    format!("{}.{}", int_part, frac.trim_end_matches('0'))
}

/// Parses a non-negative decimal numeral ("67.2", "0.4", ".5", "12") into
/// its exact rational value.
pub fn parse_decimal(text: &str) -> Result<ExactRational> {
    let trimmed = text.trim();
    let body = trimmed.strip_prefix('+').unwrap_or(trimmed);
    if let Some(rest) = body.strip_prefix('-') {
        return if split_numeral(rest).is_some() {
            Err(Error::Negative(trimmed.to_string()))
        } else {
            Err(Error::Malformed(text.to_string()))
        };
    }
    let (int_digits, frac_digits) =
        split_numeral(body).ok_or_else(|| Error::Malformed(text.to_string()))?;
    let all: String = format!("{int_digits}{frac_digits}");
    let numerator = if all.is_empty() {
        BigUint::zero()
    } else {
        all.parse::<BigUint>()
            .map_err(|_| Error::Malformed(text.to_string()))?
    };
    let denominator = num_traits::pow(BigUint::from(10u8), frac_digits.len());
    ExactRational::new(numerator, denominator)
}

fn split_numeral(s: &str) -> Option<(&str, &str)> {
    let (int_digits, frac_digits) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if int_digits.is_empty() && frac_digits.is_empty() {
        return None;
    }
    if !digits_ok(int_digits) || !digits_ok(frac_digits) {
        return None;
    }
    Some((int_digits, frac_digits))
}

impl FromStr for ExactRational {
    type Err = Error;

    /// Accepts decimal numerals and `p/q` fractions.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().split_once('/') {
            Some((p, q)) => {
                let p = p.trim();
                if p.starts_with('-') {
                    return Err(Error::Negative(s.to_string()));
                }
                let parse = |t: &str| {
                    t.trim()
                        .parse::<BigUint>()
                        .map_err(|_| Error::Malformed(s.to_string()))
                };
                ExactRational::new(parse(p)?, parse(q)?)
            }
            None => parse_decimal(s),
        }
    }
}

impl fmt::Display for ExactRational {
    /// Terminating decimals render as decimals, everything else as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(s) => f.write_str(&s),
            None => write!(f, "{}/{}", self.0.numer(), self.0.denom()),
        }
    }
}

impl Add for &ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 + &rhs.0)
    }
}

impl Mul for &ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 * &rhs.0)
    }
}

impl PartialEq<u64> for ExactRational {
    fn eq(&self, other: &u64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<u64> for ExactRational {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        self.0
            .partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, d: u64) -> ExactRational {
        ExactRational::from_ratio(n, d).unwrap()
    }

    #[test]
    fn parses_exact_decimal_fractions() {
        assert_eq!(parse_decimal("0.4").unwrap(), q(2, 5));
        assert_eq!(parse_decimal("67.2").unwrap(), q(336, 5));
        // 0.23828125 * 256 = 61, so 4.23828125 = (4*256 + 61) / 256.
        assert_eq!(parse_decimal("4.23828125").unwrap(), q(4 * 256 + 61, 256));
        assert_eq!(parse_decimal("100.0001").unwrap(), q(1_000_001, 10_000));
        assert_eq!(parse_decimal(".5").unwrap(), q(1, 2));
        assert_eq!(parse_decimal("12.").unwrap(), q(12, 1));
        assert_eq!(parse_decimal("007").unwrap(), q(7, 1));
    }

    #[test]
    fn rejects_malformed_and_negative() {
        for bad in ["", ".", "1.2.3", "abc", "1e5", "0x10", " - 1", "--1"] {
            assert!(
                matches!(parse_decimal(bad), Err(Error::Malformed(_))),
                "{bad:?}"
            );
        }
        assert!(matches!(parse_decimal("-0.4"), Err(Error::Negative(_))));
        assert!(matches!(parse_decimal("-3"), Err(Error::Negative(_))));
    }

    #[test]
    fn fraction_syntax() {
        assert_eq!("1085/256".parse::<ExactRational>().unwrap(), q(1085, 256));
        assert!("1/0".parse::<ExactRational>().is_err());
        assert!("-1/2".parse::<ExactRational>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(q(3, 8).to_decimal_string().unwrap(), "0.375");
        assert_eq!(q(0, 1).to_decimal_string().unwrap(), "0");
        assert_eq!(q(25, 2).to_decimal_string().unwrap(), "12.5");
        assert_eq!(q(1, 20).to_decimal_string().unwrap(), "0.05");
        assert_eq!(q(2, 5).to_string(), "0.4");
        assert!(q(1, 3).to_decimal_string().is_none());
        assert_eq!(q(1, 3).to_string(), "1/3");
        assert_eq!(q(336, 5).to_decimal_truncated(3), "67.2");
        assert_eq!(q(2, 3).to_decimal_truncated(4), "0.6666");
    }

    #[test]
    fn float_conversions_are_correctly_rounded() {
        assert_eq!(q(336, 5).to_f64(), 67.2f64);
        assert_eq!(q(336, 5).to_f32(), 67.2f32);
        assert_eq!(q(1_000_001, 10_000).to_f64(), 100.0001f64);
        assert_eq!(q(2, 5).to_f32(), 0.4f32);
        let exact = ExactRational::from_f64(67.2).unwrap();
        assert_eq!(
            exact.to_decimal_string().unwrap(),
            "67.2000000000000028421709430404007434844970703125"
        );
        assert_eq!(
            ExactRational::from_f64(-0.0).unwrap(),
            ExactRational::zero()
        );
        assert!(ExactRational::from_f64(-1.0).is_err());
    }

    #[test]
    fn floor_scaled_truncates() {
        // 0.4 * 16 = 6.4
        assert_eq!(q(2, 5).floor_scaled(4), BigUint::from(6u8));
        assert_eq!(q(336, 5).floor_scaled(8), BigUint::from(17203u32));
    }
}
