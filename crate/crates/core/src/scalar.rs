//! Field abstraction shared by the exact (rational) and floating pipelines.

use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// An ordered field the geometric pipeline can run over.
///
/// `f64` gives the floating mode; [`BigRational`] gives exact arithmetic,
/// in which every tolerance collapses to zero and comparisons are decided
/// by exact sign.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    /// Default comparison tolerance: `0` in exact mode.
    fn default_tol() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a float; exact conversion for rationals (every finite float
    /// is a dyadic rational).
    fn from_float(x: f64) -> Option<Self>;

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    /// `|self| <= tol`
    fn near_zero(&self, tol: &Self) -> bool {
        self.abs() <= *tol
    }

    /// Rounds to the nearest integer if within `tol`.
    fn as_integer(&self, tol: &Self) -> Option<i64>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn default_tol() -> Self {
        1e-9
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_float(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn as_integer(&self, tol: &Self) -> Option<i64> {
        let r = libm::round(*self);
        ((self - r).abs() <= *tol).then_some(r as i64)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn default_tol() -> Self {
        Self::zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_float(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn as_integer(&self, tol: &Self) -> Option<i64> {
        let r = self.round();
        if (self - &r).abs() <= *tol {
            r.to_integer().to_i64()
        } else {
            None
        }
    }
}

pub(crate) fn sint<S: Scalar>(v: i64) -> S {
    S::from_i64(v).unwrap_or_else(S::zero)
}

pub(crate) fn half<S: Scalar>() -> S {
    S::one() / (S::one() + S::one())
}

pub(crate) fn factorial<S: Scalar>(n: usize) -> S {
    (1..=n).fold(S::one(), |acc, k| acc * sint::<S>(k as i64))
}

/// Parses `"p/q"`, an integer, or a decimal literal (exact for rationals).
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(S::from_ratio(p, q));
    }
    if S::EXACT {
        parse_decimal_exact(t)
    } else {
        S::from_float(t.parse::<f64>().ok()?)
    }
}

fn parse_decimal_exact<S: Scalar>(t: &str) -> Option<S> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let ten = sint::<S>(10);
    let mut value = S::zero();
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(10)? as i64;
        value = value * ten.clone() + sint::<S>(d);
    }
    let shift = exp - frac_part.len() as i32;
    let scale = (0..shift.unsigned_abs()).fold(S::one(), |acc, _| acc * ten.clone());
    value = if shift >= 0 { value * scale } else { value / scale };
    Some(if neg { -value } else { value })
}

/// Renders an exact value as `p/q` (or `p` when integral).
pub fn rational_string(x: &BigRational) -> alloc::string::String {
    use alloc::string::ToString;
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_and_decimal_exactly() {
        let q: BigRational = parse_scalar("16/3").unwrap();
        assert_eq!(q, BigRational::from_ratio(16, 3));
        let d: BigRational = parse_scalar("-0.75").unwrap();
        assert_eq!(d, BigRational::from_ratio(-3, 4));
        let e: BigRational = parse_scalar("1.5e2").unwrap();
        assert_eq!(e, BigRational::from_ratio(150, 1));
        assert!(parse_scalar::<BigRational>("1/0").is_none());
        assert!(parse_scalar::<f64>("abc").is_none());
        assert_eq!(parse_scalar::<f64>("1/4"), Some(0.25));
    }

    #[test]
    fn integer_detection_respects_tolerance() {
        assert_eq!((-2.0000000001f64).as_integer(&1e-9), Some(-2));
        assert_eq!(0.5f64.as_integer(&1e-9), None);
        assert_eq!(BigRational::from_ratio(-6, 3).as_integer(&BigRational::zero()), Some(-2));
    }
}
