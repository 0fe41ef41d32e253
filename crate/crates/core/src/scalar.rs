//! Dual-mode arithmetic.
//!
//! Every computation in the crate is generic over [`Scalar`], which has two
//! implementations: [`Rational`] (arbitrary-precision, never rounds) and
//! `f64`. Because the mode is a type parameter, mixing exact and floating
//! values in one computation is a compile error rather than a runtime one.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, DeserializeOwned, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a {mode} scalar")]
pub struct ScalarParseError {
    pub input: String,
    pub mode: Mode,
}

/// A real number in one of the two arithmetic modes.
///
/// Comparisons that are meant to hold "almost everywhere" go through
/// [`Scalar::ae_eq`] and [`Scalar::ae_le`], which are exact for rationals and
/// use an absolute tolerance of `1e-9` for floats.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Hashable identity used to group atoms by value.
    type Key: Eq + Hash + Clone + Send + Sync + fmt::Debug;

    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `numer / denom`. Panics when `denom == 0`.
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn key(&self) -> Self::Key;
    fn abs(&self) -> Self;
    fn powi(&self, n: u32) -> Self;
    /// The real `n`-th root when it is representable in this mode.
    fn nth_root(&self, n: u32) -> Option<Self>;
    fn is_finite(&self) -> bool;
    fn parse_str(s: &str) -> Result<Self, ScalarParseError>;
    /// Absolute slack granted to almost-everywhere comparisons.
    fn tolerance() -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn pos_part(&self) -> Self {
        if *self > Self::zero() {
            self.clone()
        } else {
            Self::zero()
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn ae_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn ae_le(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    /// Three-way comparison that treats values within tolerance as equal.
    fn ae_cmp(&self, other: &Self) -> Ordering {
        if self.ae_eq(other) {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// Arbitrary-precision rational number; serialises as `"p/q"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(inner: BigRational) -> Self {
        Rational(inner)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Largest integer not above `self`.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScalarParseError {
            input: s.to_string(),
            mode: Mode::Exact,
        };
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        if let Ok(n) = s.parse::<BigInt>() {
            return Ok(Rational(BigRational::from_integer(n)));
        }
        // Terminating decimals such as "-0.25" are exact as well.
        parse_decimal(s).map(Rational).ok_or_else(err)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", int_part, frac_part).parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = BigRational::new(digits, scale);
    Some(if neg { -v } else { v })
}

impl Serialize for Rational {
    fn serialize<Se: Serializer>(&self, serializer: Se) -> Result<Se::Ok, Se::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_i64(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                // JSON floats are binary; go through the shortest decimal form.
                v.to_string().parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;

            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }

        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;

            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;

    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    type Key = Rational;

    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }

    fn one() -> Self {
        Rational(BigRational::one())
    }

    fn from_i64(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(numer, denom)
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn key(&self) -> Self::Key {
        self.clone()
    }

    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    fn powi(&self, n: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), n as usize))
    }

    fn nth_root(&self, n: u32) -> Option<Self> {
        if n == 0 {
            return None;
        }
        if n == 1 {
            return Some(self.clone());
        }
        if self.0.is_negative() && n.is_multiple_of(2) {
            return None;
        }
        let numer = self.0.numer();
        let denom = self.0.denom();
        let rn = numer.nth_root(n);
        let rd = denom.nth_root(n);
        if num_traits::pow(rn.clone(), n as usize) == *numer
            && num_traits::pow(rd.clone(), n as usize) == *denom
        {
            Some(Rational(BigRational::new(rn, rd)))
        } else {
            None
        }
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn parse_str(s: &str) -> Result<Self, ScalarParseError> {
        s.parse()
    }

    fn tolerance() -> Self {
        Self::zero()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn ae_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn ae_le(&self, other: &Self) -> bool {
        self <= other
    }
}

/// Float tolerance for almost-everywhere comparisons.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

impl Scalar for f64 {
    type Key = u64;

    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn key(&self) -> u64 {
        // -0.0 and 0.0 are the same value; everything else groups bitwise.
        if *self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }

    fn nth_root(&self, n: u32) -> Option<Self> {
        match n {
            0 => None,
            1 => Some(*self),
            2 if *self >= 0.0 => Some(self.sqrt()),
            _ if *self < 0.0 && n.is_multiple_of(2) => None,
            _ if *self < 0.0 => Some(-(-self).powf(1.0 / n as f64)),
            _ => Some(self.powf(1.0 / n as f64)),
        }
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn parse_str(s: &str) -> Result<Self, ScalarParseError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().ok().filter(|v: &f64| v.is_finite()).ok_or(
                ScalarParseError {
                    input: s.to_string(),
                    mode: Mode::Float,
                },
            )?;
            let d: f64 = d.trim().parse().ok().filter(|v: &f64| *v != 0.0).ok_or(
                ScalarParseError {
                    input: s.to_string(),
                    mode: Mode::Float,
                },
            )?;
            return Ok(n / d);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or(ScalarParseError {
                input: s.to_string(),
                mode: Mode::Float,
            })
    }

    fn tolerance() -> Self {
        FLOAT_TOLERANCE
    }
}

/// Element of `[0, ∞]`, the codomain of lower Lebesgue integrals and of
/// the supremum of upcrossing counts.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedNonNeg<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> ExtendedNonNeg<S> {
    /// Positive part of a real, embedded in `[0, ∞]`.
    pub fn of_real(x: S) -> Self {
        ExtendedNonNeg::Finite(x.pos_part())
    }

    pub fn zero() -> Self {
        ExtendedNonNeg::Finite(S::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedNonNeg::Infinity)
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            ExtendedNonNeg::Finite(v) => Some(v),
            ExtendedNonNeg::Infinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedNonNeg::Finite(v) => v.to_f64(),
            ExtendedNonNeg::Infinity => f64::INFINITY,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => {
                ExtendedNonNeg::Finite(a.clone() + b.clone())
            }
            _ => ExtendedNonNeg::Infinity,
        }
    }

    /// Product with the measure-theoretic convention `0 · ∞ = 0`.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => {
                ExtendedNonNeg::Finite(a.clone() * b.clone())
            }
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Infinity)
            | (ExtendedNonNeg::Infinity, ExtendedNonNeg::Finite(a)) => {
                if a.is_zero() {
                    ExtendedNonNeg::zero()
                } else {
                    ExtendedNonNeg::Infinity
                }
            }
            (ExtendedNonNeg::Infinity, ExtendedNonNeg::Infinity) => ExtendedNonNeg::Infinity,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `≤` with the scalar tolerance on finite values.
    pub fn ae_le(&self, other: &Self) -> bool {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => a.ae_le(b),
            (_, ExtendedNonNeg::Infinity) => true,
            (ExtendedNonNeg::Infinity, ExtendedNonNeg::Finite(_)) => false,
        }
    }
}

impl<S: Scalar> PartialOrd for ExtendedNonNeg<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => a.partial_cmp(b),
            (ExtendedNonNeg::Finite(_), ExtendedNonNeg::Infinity) => Some(Ordering::Less),
            (ExtendedNonNeg::Infinity, ExtendedNonNeg::Finite(_)) => Some(Ordering::Greater),
            (ExtendedNonNeg::Infinity, ExtendedNonNeg::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl<S: Scalar> fmt::Display for ExtendedNonNeg<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedNonNeg::Finite(v) => write!(f, "{}", v),
            ExtendedNonNeg::Infinity => f.write_str("inf"),
        }
    }
}
