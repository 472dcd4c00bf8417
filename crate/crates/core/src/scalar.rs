//! Scalar abstraction for model parameters and precision values.
//!
//! Batch-norm parameters, output biases and precision ratios are generic over
//! [`Scalar`]. Every threshold decision is made on the exact rational value
//! of the stored scalar, so `f32`, `f64` and [`BigRational`] models classify
//! identically whenever they store the same numbers.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + FromPrimitive + Send + Sync + 'static
{
    /// Exact rational value; `None` for non-finite floats.
    fn to_rational(&self) -> Option<BigRational>;

    /// Nearest representable value.
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn ratio(num: &BigUint, den: &BigUint) -> Self {
        let r = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
        Self::from_rational(&r)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge operands: shift both down to a representable range.
    let bits = r.numer().bits().max(r.denom().bits());
    let shift = bits.saturating_sub(1000) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

impl Scalar for f64 {
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
}

/// Smallest integer `>= r`.
pub fn ceil_int(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Largest integer `<= r`.
pub fn floor_int(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Clamp a rational into `[0, 1]`.
pub fn clamp_unit(r: BigRational) -> BigRational {
    if r < BigRational::zero() {
        BigRational::zero()
    } else if r > BigRational::one() {
        BigRational::one()
    } else {
        r
    }
}

/// Exact rational for a probability threshold given as `f64`, read as the
/// shortest decimal that round-trips (so `0.95` means `19/20`, not the
/// nearest binary fraction).
pub fn threshold_rational(tau: f64) -> BigRational {
    if !tau.is_finite() {
        return BigRational::one();
    }
    let text = format!("{tau:e}");
    let (mantissa, exp) = text.split_once('e').unwrap_or((&text, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap_or_default();
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    }
}
