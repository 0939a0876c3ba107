//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All math is written against [`Scalar`] so the same code runs in `f32` or
//! `f64`. Tolerances quoted in the tests assume `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Name written into model files so a reader can reject a mismatched width.
    const NAME: &'static str;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}

/// `ln(1 + e^x)` without overflow for large `x` or precision loss for very
/// negative `x`.
#[inline]
pub fn log1p_exp<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + e^{-x})`, evaluated on the branch that never
/// exponentiates a large positive number.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `sign` with the convention `sign(0) = +1`.
#[inline]
pub fn sign<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Rescales `w` in place so it sums to one. Returns the original sum.
pub(crate) fn normalize_in_place<T: Scalar>(w: &mut [T]) -> T {
    let total: T = w.iter().copied().sum();
    for v in w.iter_mut() {
        *v = *v / total;
    }
    total
}
