//! Scalar backends shared by tensors, invariants and polynomials.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::Neg;

/// A real field element: exact rational or `f64`.
pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// True when the backend is exact.
    fn is_exact() -> bool;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
}

pub type Rational = BigRational;
pub type Cx<T> = Complex<T>;

/// Converts a rational to the nearest double without overflowing on huge parts.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // scale into [2^-60, 2^60] and restore the exponent afterwards
    let scaled = if shift > 0 {
        BigRational::new(n.clone(), d.clone() << (shift as usize))
    } else {
        BigRational::new(n.clone() << ((-shift) as usize), d.clone())
    };
    let v = ToPrimitive::to_f64(&scaled).unwrap_or(0.0);
    v * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// Exact rational image of a finite double.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap_or_else(BigRational::zero)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "3/4", "-2", "0.125" or "1e-3" exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Canonical text form: "p/q" or "p".
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn abs_rational(r: &BigRational) -> BigRational {
    r.abs()
}
