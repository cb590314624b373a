//! Real coefficient fields.
//!
//! Every algebraic object in the crate is generic over a real field `F`;
//! complex coefficients are `Complex<F>`. Exact work uses [`Rational`]
//! (arbitrary precision), numeric work uses `f64` (or `f32`).

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational.
pub type Rational = BigRational;

/// A real field usable as the component type of Laurent coefficients.
pub trait Real: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// Whether arithmetic in this field is exact.
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    /// Nearest representable value. Exact for rationals (the binary value of `x`).
    fn from_float(x: f64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Zero test used by canonicalization and divisibility checks.
    ///
    /// Exact fields test for literal zero; floating fields compare against
    /// `tol * scale`.
    fn negligible(&self, scale: f64, tol: f64) -> bool;

    /// Exact rational value (floats convert bit-exactly).
    fn to_rational(&self) -> Rational {
        <BigRational as FromPrimitive>::from_f64(self.to_f64()).unwrap_or_else(BigRational::zero)
    }

    fn from_rational(r: &Rational) -> Self {
        Self::from_float(Real::to_f64(r))
    }
}

impl Real for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_float(x: f64) -> Self {
        x
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.abs() <= tol * scale.max(1.0)
    }
}

impl Real for f32 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn from_float(x: f64) -> Self {
        x as f32
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        f64::from(self.abs()) <= tol.max(f64::from(f32::EPSILON) * 8.0) * scale.max(1.0)
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back through the integer parts for huge magnitudes.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn from_float(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).unwrap_or_else(BigRational::zero)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn negligible(&self, _scale: f64, _tol: f64) -> bool {
        self.is_zero()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

/// Complex number with components in `F`.
pub type Cx<F> = Complex<F>;

pub fn cx<F: Real>(re: F, im: F) -> Cx<F> {
    Complex::new(re, im)
}

pub fn cx_ratio<F: Real>(re: (i64, i64), im: (i64, i64)) -> Cx<F> {
    Complex::new(F::from_ratio(re.0, re.1), F::from_ratio(im.0, im.1))
}

pub fn cx_to_f64<F: Real>(c: &Cx<F>) -> Complex<f64> {
    Complex::new(c.re.to_f64(), c.im.to_f64())
}

pub fn cx_from_f64<F: Real>(c: Complex<f64>) -> Cx<F> {
    Complex::new(F::from_float(c.re), F::from_float(c.im))
}

/// Modulus as a float (cheap magnitude estimate for any field).
pub fn cx_abs<F: Real>(c: &Cx<F>) -> f64 {
    cx_to_f64(c).norm()
}

pub fn cx_negligible<F: Real>(c: &Cx<F>, scale: f64, tol: f64) -> bool {
    c.re.negligible(scale, tol) && c.im.negligible(scale, tol)
}

/// Formats a rational as `p/q` (the denominator is always written).
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn rational_from_str(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return None;
    }
    let r: Rational = s.parse().ok()?;
    Some(r)
}

/// `|x|` for a rational, used in pivot selection.
pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}
