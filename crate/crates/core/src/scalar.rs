//! Number types usable by the exact measure algebra.

use num_rational::BigRational;
use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};
use std::fmt::Debug;

/// A field of numbers with a notion of "negligible".
///
/// Floats treat values within `1e-14` of zero as zero; rationals are exact.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    fn from_float(x: f64) -> Self;
    fn to_float(&self) -> f64;
    fn negligible(&self) -> bool;

    fn is_positive_strict(&self) -> bool {
        !self.negligible() && *self > Self::zero()
    }

    fn close_to(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).negligible()
    }
}

impl Scalar for f64 {
    fn from_float(x: f64) -> Self {
        x
    }
    fn to_float(&self) -> f64 {
        *self
    }
    fn negligible(&self) -> bool {
        self.abs() <= 1e-14
    }
}

impl Scalar for BigRational {
    /// Exact binary expansion of the float.
    fn from_float(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite float")
    }
    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Absolute value helper shared by both number types.
pub fn abs<S: Scalar>(x: &S) -> S {
    if *x < S::zero() {
        S::zero() - x.clone()
    } else {
        x.clone()
    }
}

/// Parses `"p/q"`, integers, or decimal strings into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = BigRational::new(num, den);
        return Some(if negative { -value } else { value });
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}
