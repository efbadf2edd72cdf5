//! Exact arithmetic primitives.
//!
//! [`Rational`] is an arbitrary-precision fraction used for every money value,
//! unit basis and exchange rate. [`Quantity`] is a non-negative arbitrary
//! precision integer used for currency units and item counts. Nothing in this
//! crate touches binary floating point; rounding happens only when a value is
//! rendered for display.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseAmountError {
    #[error("empty number")]
    Empty,
    #[error("invalid decimal {0:?}")]
    InvalidDecimal(String),
    #[error("invalid integer {0:?}")]
    InvalidInteger(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// Builds `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    /// `numer / denom` for two quantities; `None` when `denom` is zero.
    pub fn ratio(numer: &Quantity, denom: &Quantity) -> Option<Self> {
        if denom.is_zero() {
            return None;
        }
        Some(Rational(BigRational::new(
            numer.to_bigint(),
            denom.to_bigint(),
        )))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    /// Parses a plain decimal string such as `"19.99"` or `"0.1"`.
    ///
    /// Signs, exponents, and surrounding whitespace are rejected. Trailing
    /// zeros are insignificant: `"19.990000"` equals `"19.99"`.
    pub fn parse_decimal(text: &str) -> Result<Self, ParseAmountError> {
        if text.is_empty() {
            return Err(ParseAmountError::Empty);
        }
        let invalid = || ParseAmountError::InvalidDecimal(text.to_string());
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || (text.contains('.') && frac_part.is_empty())
        {
            return Err(invalid());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| invalid())?;
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// Parses either a decimal (`"19.99"`) or a fraction (`"1999/1000"`).
    pub fn parse(text: &str) -> Result<Self, ParseAmountError> {
        match text.split_once('/') {
            None => Self::parse_decimal(text),
            Some((n, d)) => {
                let numer: BigInt = n
                    .parse()
                    .map_err(|_| ParseAmountError::InvalidDecimal(text.to_string()))?;
                let denom: BigInt = d
                    .parse()
                    .map_err(|_| ParseAmountError::InvalidDecimal(text.to_string()))?;
                if denom.is_zero() {
                    return Err(ParseAmountError::ZeroDenominator);
                }
                Ok(Rational(BigRational::new(numer, denom)))
            }
        }
    }

    /// Exact form: `"1999/1000"`, or `"19"` for integers.
    pub fn to_exact_string(&self) -> String {
        if self.0.is_integer() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }

    /// Terminating decimal expansion, or `None` when the denominator has a
    /// prime factor other than 2 or 5.
    pub fn to_terminating_decimal(&self) -> Option<String> {
        let mut denom = self.0.denom().magnitude().clone();
        let two = BigUint::from(2u32);
        let five = BigUint::from(5u32);
        let (mut twos, mut fives) = (0u32, 0u32);
        while denom.is_even() {
            denom /= &two;
            twos += 1;
        }
        while (&denom % &five).is_zero() {
            denom /= &five;
            fives += 1;
        }
        if !denom.is_one() {
            return None;
        }
        let places = twos.max(fives);
        Some(self.fixed_truncated(places as usize))
    }

    /// Decimal text when it terminates, fraction text otherwise.
    pub fn to_plain_string(&self) -> String {
        self.to_terminating_decimal()
            .unwrap_or_else(|| self.to_exact_string())
    }

    /// Two-decimal display form. Truncates toward zero, so `1999/1000`
    /// renders as `"1.99"`.
    pub fn to_display(&self) -> String {
        self.fixed_truncated(2)
    }

    fn fixed_truncated(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled = (self.0.numer().abs() * &scale) / self.0.denom().abs();
        let negative = self.0.is_negative() && !scaled.is_zero();
        let digits = scaled.to_string();
        let body = if places == 0 {
            digits
        } else {
            let padded = format!("{digits:0>width$}", width = places + 1);
            let (int, frac) = padded.split_at(padded.len() - places);
            format!("{int}.{frac}")
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }

    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_exact_string())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rational({})", self.to_exact_string())
    }
}

impl FromStr for Rational {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse(s)
    }
}

impl From<&Quantity> for Rational {
    fn from(q: &Quantity) -> Self {
        Rational::from_integer(q.to_bigint())
    }
}

impl From<Quantity> for Rational {
    fn from(q: Quantity) -> Self {
        Rational::from(&q)
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

/// Panics on division by zero, like the underlying big rational.
impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        Rational(&self.0 / &rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_exact_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Non-negative integral count of currency units or items.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Quantity(BigUint);

impl Quantity {
    pub fn zero() -> Self {
        Quantity(BigUint::zero())
    }

    pub fn new(units: u64) -> Self {
        Quantity(BigUint::from(units))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn units(&self) -> &BigUint {
        &self.0
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.0.clone())
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// Parses a base-10 integer with no sign or decimal point.
    pub fn parse(text: &str) -> Result<Self, ParseAmountError> {
        if text.is_empty() {
            return Err(ParseAmountError::Empty);
        }
        if !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseAmountError::InvalidInteger(text.to_string()));
        }
        text.parse::<BigUint>()
            .map(Quantity)
            .map_err(|_| ParseAmountError::InvalidInteger(text.to_string()))
    }

    pub fn checked_sub(&self, rhs: &Quantity) -> Option<Quantity> {
        if self.0 >= rhs.0 {
            Some(Quantity(&self.0 - &rhs.0))
        } else {
            None
        }
    }

    pub fn scaled(&self, factor: u64) -> Quantity {
        Quantity(&self.0 * BigUint::from(factor))
    }
}

impl From<u64> for Quantity {
    fn from(units: u64) -> Self {
        Quantity::new(units)
    }
}

impl From<BigUint> for Quantity {
    fn from(units: BigUint) -> Self {
        Quantity(units)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quantity({})", self.0)
    }
}

impl<'a> Add<&'a Quantity> for &'a Quantity {
    type Output = Quantity;
    fn add(self, rhs: &'a Quantity) -> Quantity {
        Quantity(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Quantity> for Quantity {
    fn add_assign(&mut self, rhs: &Quantity) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sum<&'a Quantity> for Quantity {
    fn sum<I: Iterator<Item = &'a Quantity>>(iter: I) -> Quantity {
        iter.fold(Quantity::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl<'a> Mul<&'a Rational> for &'a Quantity {
    type Output = Rational;
    fn mul(self, rhs: &'a Rational) -> Rational {
        &Rational::from(self) * rhs
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Quantity::parse(&text).map_err(serde::de::Error::custom)
    }
}
