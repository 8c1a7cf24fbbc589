//! Fixed-point binary numbers and the round-off map.
//!
//! A [`FixedBinary`] is an unnormalized bit string with `p` integer and `q`
//! fractional bits. [`round_off`] projects an exact rational onto that grid
//! by truncation toward zero. Doubling is a shift of the binary point and
//! subtraction happens on a shared grid, so neither ever loses a bit; the
//! only round-off in a fixed-point tent-map run is the one taken when the
//! initial condition and the bound enter the machine.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Integer and fractional bit counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionSpec {
    p: u32,
    q: u32,
}

impl PrecisionSpec {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidPrecision { p, q });
        }
        Ok(PrecisionSpec { p, q })
    }

    /// `p = ceil(log2(bound + 1)) + 1`: room for every value in `[0, bound]`
    /// plus one spare bit.
    pub fn for_bound(bound: &ExactRational, q: u32) -> Result<Self> {
        let target = bound + &ExactRational::one();
        let mut bits = 0u32;
        while ExactRational::one().shl(bits) < target {
            bits += 1;
        }
        Self::new(bits + 1, q)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Total precision `m = p + q`.
    pub fn total_bits(&self) -> u32 {
        self.p + self.q
    }

    fn limit(&self) -> BigUint {
        BigUint::one() << self.total_bits() as usize
    }
}

impl fmt::Display for PrecisionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

/// `magnitude · 2^-q`, with `magnitude < 2^(p+q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedBinary {
    magnitude: BigUint,
    spec: PrecisionSpec,
}

/// Integer classification of a fixed-point value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegerClass {
    NotInteger,
    OddInteger,
    EvenInteger,
}

impl FixedBinary {
    pub fn from_magnitude(magnitude: BigUint, spec: PrecisionSpec) -> Result<Self> {
        if magnitude >= spec.limit() {
            let value = ExactRational::new(magnitude, BigUint::one() << spec.q as usize)?;
            return Err(Error::Overflow {
                value: value.to_string(),
                p: spec.p,
            });
        }
        Ok(FixedBinary { magnitude, spec })
    }

    pub fn zero(spec: PrecisionSpec) -> Self {
        FixedBinary {
            magnitude: BigUint::zero(),
            spec,
        }
    }

    pub fn magnitude(&self) -> &BigUint {
        &self.magnitude
    }

    pub fn spec(&self) -> PrecisionSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude.is_zero()
    }

    /// Compares the represented values, regardless of precision.
    pub fn cmp_value(&self, other: &FixedBinary) -> Ordering {
        let a = &self.magnitude << other.spec.q as usize;
        let b = &other.magnitude << self.spec.q as usize;
        a.cmp(&b)
    }

    /// Position of the lowest set fractional bit, counted 1..=q from the
    /// binary point; `None` for integers.
    pub fn lowest_fractional_bit(&self) -> Option<u32> {
        let tz = self.magnitude.trailing_zeros()?;
        let q = u64::from(self.spec.q);
        (tz < q).then(|| (q - tz) as u32)
    }

    /// Renders the bit string as `IIII.FFFF` with exactly `p` integer and
    /// `q` fractional digits.
    pub fn to_bit_string(&self) -> String {
        let p = self.spec.p as usize;
        let q = self.spec.q as usize;
        let raw = self.magnitude.to_str_radix(2);
        let padded = format!("{:0>width$}", raw, width = p + q);
        if q == 0 {
            padded
        } else {
            let (int, frac) = padded.split_at(padded.len() - q);
            format!("{int}.{frac}")
        }
    }

    /// Parses a bit string produced by [`to_bit_string`](Self::to_bit_string);
    /// the digit counts fix the precision.
    pub fn from_bit_string(text: &str) -> Result<Self> {
        let malformed = || Error::Malformed(text.to_string());
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if int.is_empty()
            || !int
                .bytes()
                .chain(frac.bytes())
                .all(|b| b == b'0' || b == b'1')
        {
            return Err(malformed());
        }
        let spec = PrecisionSpec::new(int.len() as u32, frac.len() as u32)?;
        let magnitude =
            BigUint::parse_bytes(format!("{int}{frac}").as_bytes(), 2).ok_or_else(malformed)?;
        Self::from_magnitude(magnitude, spec)
    }
}

impl fmt::Display for FixedBinary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// The round-off map: the largest grid value `<= x`.
pub fn round_off(x: &ExactRational, spec: PrecisionSpec) -> Result<FixedBinary> {
    if *x >= ExactRational::one().shl(spec.p) {
        return Err(Error::Overflow {
            value: x.to_string(),
            p: spec.p,
        });
    }
    Ok(FixedBinary {
        magnitude: x.floor_scaled(spec.q),
        spec,
    })
}

/// Exact `2x`: the binary point moves one place right.
pub fn double_value(x: &FixedBinary) -> Result<FixedBinary> {
    FixedBinary::from_magnitude(&x.magnitude << 1usize, x.spec)
}

/// Exact `n - x`, where `n` must sit on `x`'s grid.
pub fn subtract_from(n: &ExactRational, x: &FixedBinary) -> Result<FixedBinary> {
    let n_fixed = round_off(n, x.spec)?;
    if to_rational(&n_fixed) != *n {
        return Err(Error::NotRepresentable(n.to_string(), x.spec.q));
    }
    subtract_fixed(&n_fixed, x)
}

/// Exact `n - x` for two values on the same grid.
pub fn subtract_fixed(n: &FixedBinary, x: &FixedBinary) -> Result<FixedBinary> {
    if n.spec != x.spec {
        return Err(Error::PrecisionMismatch(
            n.spec.to_string(),
            x.spec.to_string(),
        ));
    }
    if x.magnitude > n.magnitude {
        return Err(Error::NegativeResult {
            minuend: n.to_string(),
            subtrahend: x.to_string(),
        });
    }
    Ok(FixedBinary {
        magnitude: &n.magnitude - &x.magnitude,
        spec: n.spec,
    })
}

/// Integer iff every fractional bit is zero; parity is bit `q`.
pub fn classify_integer(x: &FixedBinary) -> IntegerClass {
    if x.lowest_fractional_bit().is_some() {
        IntegerClass::NotInteger
    } else if x.magnitude.bit(u64::from(x.spec.q)) {
        IntegerClass::OddInteger
    } else {
        IntegerClass::EvenInteger
    }
}

/// Exact decimal expansion; always finite since the value is dyadic.
pub fn to_decimal_string(x: &FixedBinary) -> String {
    to_rational(x)
        .to_decimal_string()
        .expect("dyadic rationals have terminating decimal expansions")
}

pub fn to_rational(x: &FixedBinary) -> ExactRational {
    ExactRational::new(x.magnitude.clone(), BigUint::one() << x.spec.q as usize)
        .expect("power of two is non-zero")
}
