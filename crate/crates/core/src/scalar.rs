//! Exact rational scalars.
//!
//! Every coefficient, coordinate and parameter in this crate is a [`Scalar`]:
//! an arbitrary-precision rational kept in lowest terms with a positive
//! denominator. Nothing ever rounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use thiserror::Error;

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

/// Failure to read a scalar from its `"p/q"` text form.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("invalid integer `{0}` in scalar literal")]
    BadInteger(String),
    #[error("zero denominator in scalar literal")]
    ZeroDenominator,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    /// `n/d`, normalized. Panics if `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar(BigRational::from_integer(n))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The integer value, when the denominator is 1.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.numer().clone())
    }

    pub fn abs(&self) -> Scalar {
        Scalar(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        Scalar(self.0.recip())
    }

    /// Exact integer power; negative exponents invert (panics on 0^negative).
    pub fn pow(&self, e: i64) -> Scalar {
        if e == 0 {
            return Scalar::one();
        }
        let base = if e < 0 { self.recip() } else { self.clone() };
        let m = e.unsigned_abs();
        let mut acc = Scalar::one();
        let mut sq = base;
        let mut m = m;
        while m > 0 {
            if m & 1 == 1 {
                acc = &acc * &sq;
            }
            m >>= 1;
            if m > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Exact rational `n`-th root, if one exists.
    pub fn nth_root(&self, n: u32) -> Option<Scalar> {
        assert!(n > 0);
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.is_negative() && n % 2 == 0 {
            return None;
        }
        let num = self.numer().abs();
        let den = self.denom().clone();
        let rn = num.nth_root(n);
        let rd = den.nth_root(n);
        if num != rn.pow(n) || den != rd.pow(n) {
            return None;
        }
        let signed = if self.is_negative() { -rn } else { rn };
        Some(Scalar(BigRational::new(signed, rd)))
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }
}

impl From<i32> for Scalar {
    fn from(n: i32) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }
}

impl From<u32> for Scalar {
    fn from(n: u32) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts `"p"` or `"p/q"` with optionally signed decimal integers.
    /// Non-canonical forms are normalized; a zero denominator is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        let parse_int = |t: &str| {
            BigInt::from_str(t).map_err(|_| ScalarParseError::BadInteger(t.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Scalar(BigRational::from_integer(parse_int(s)?))),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(ScalarParseError::ZeroDenominator);
                }
                Ok(Scalar(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero");
        Scalar(&self.0 / &rhs.0)
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Div<&Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_normalize() {
        let s: Scalar = "2/4".parse().unwrap();
        assert_eq!(s, Scalar::new(1, 2));
        let s: Scalar = "-3/6".parse().unwrap();
        assert_eq!(s, Scalar::new(-1, 2));
        let s: Scalar = "7".parse().unwrap();
        assert_eq!(s, Scalar::from(7));
        assert_eq!(s.to_string(), "7");
        assert_eq!(Scalar::new(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn parse_rejects_zero_denominator_and_garbage() {
        assert_eq!(
            "1/0".parse::<Scalar>(),
            Err(ScalarParseError::ZeroDenominator)
        );
        assert!("".parse::<Scalar>().is_err());
        assert!("1.5".parse::<Scalar>().is_err());
        assert!("a/b".parse::<Scalar>().is_err());
    }

    #[test]
    fn pow_and_roots() {
        assert_eq!(Scalar::new(2, 3).pow(3), Scalar::new(8, 27));
        assert_eq!(Scalar::new(2, 3).pow(-2), Scalar::new(9, 4));
        assert_eq!(Scalar::from(0).pow(5), Scalar::zero());
        assert_eq!(Scalar::new(8, 27).nth_root(3), Some(Scalar::new(2, 3)));
        assert_eq!(Scalar::new(-8, 27).nth_root(3), Some(Scalar::new(-2, 3)));
        assert_eq!(Scalar::from(2).nth_root(2), None);
        assert_eq!(Scalar::from(-4).nth_root(2), None);
        assert_eq!(Scalar::from(9).nth_root(2), Some(Scalar::from(3)));
    }

    #[test]
    fn display_round_trip() {
        for s in [Scalar::new(-7, 3), Scalar::from(0), Scalar::new(22, 11)] {
            let back: Scalar = s.to_string().parse().unwrap();
            assert_eq!(back, s);
        }
    }
}
