//! The two scalar fields the crate computes over.
//!
//! Exact identities (commutativity, subspace invariance, the cohomology
//! Pfaffian) are checked over [`Rational`]; quadrature, finite differences and
//! ODE transport run over [`Complex`]. Both implement [`Scalar`], and every
//! polynomial, operator and matrix type is generic over it, so mixing the two
//! kinds is rejected at compile time.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number in canonical reduced form.
pub type Rational = BigRational;

/// Double-precision complex number.
pub type Complex = Complex64;

/// Which arithmetic a scalar type provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Exact,
    Float,
}

impl ScalarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalarKind::Exact => "exact",
            ScalarKind::Float => "float",
        }
    }
}

/// Field operations plus the handful of conversions the algorithms need.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const KIND: ScalarKind;

    fn from_i64(value: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Absolute value as a float, used to rank residuals.
    fn magnitude(&self) -> f64;

    /// Absolute value in the same field (`|x|` for rationals, `|z| + 0i` for complex).
    fn modulus(&self) -> Self;

    fn to_complex(&self) -> Complex;

    /// Equality used for parameter constraints: exact for rationals, relative
    /// `1e-12` for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    /// Renders the value for reports: `"p/q"` for rationals.
    fn render(&self) -> String;
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Exact;

    fn from_i64(value: i64) -> Self {
        Rational::from_integer(BigInt::from(value))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn modulus(&self) -> Self {
        self.abs()
    }

    fn to_complex(&self) -> Complex {
        Complex::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for Complex {
    const KIND: ScalarKind = ScalarKind::Float;

    fn from_i64(value: i64) -> Self {
        Complex::new(value as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(num as f64 / den as f64, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn modulus(&self) -> Self {
        Complex::new(self.norm(), 0.0)
    }

    fn to_complex(&self) -> Complex {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1.0f64.max(self.norm()).max(other.norm());
        (self - other).norm() <= 1e-12 * scale
    }

    fn render(&self) -> String {
        if self.im == 0.0 {
            format!("{:e}", self.re)
        } else {
            format!("{:e}{:+e}i", self.re, self.im)
        }
    }
}

/// Converts an exact value into the float field.
pub fn to_float(value: &Rational) -> Complex {
    value.to_complex()
}

/// Real part of a rational as `f64`.
pub fn rational_to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.125"` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = || Error::Parameter(format!("cannot parse {text:?} as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parameter(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_value = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| bad())?
        };
        let frac_value = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let magnitude = Rational::new(int_value * &scale + frac_value, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(value: f64) -> Result<Rational, Error> {
    Rational::from_float(value)
        .ok_or_else(|| Error::Parameter(format!("{value} is not a finite number")))
}

/// Shorthand for `Rational::from_ratio`.
pub fn ratio(num: i64, den: i64) -> Rational {
    <Rational as Scalar>::from_ratio(num, den)
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(values: &[S]) -> S {
    values.iter().cloned().fold(S::zero(), |acc, v| acc + v)
}

/// `base^exp` for a nonnegative integer exponent.
pub fn powi<S: Scalar>(base: &S, exp: u32) -> S {
    (0..exp).fold(S::one(), |acc, _| acc * base.clone())
}

/// Keeps the scalar with the largest magnitude.
pub fn max_by_magnitude<S: Scalar>(acc: S, candidate: S) -> S {
    if candidate.magnitude() > acc.magnitude() {
        candidate
    } else {
        acc
    }
}
