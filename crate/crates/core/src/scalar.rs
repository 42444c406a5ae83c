//! Scalar abstractions.
//!
//! Everything that only needs field arithmetic (matrix products, scheme
//! construction, Gram and defect matrices) is written against [`Scalar`], so
//! it runs unchanged over `f32`, `f64` or an exact rational type such as
//! `num_rational::Rational64`. Anything that needs square roots, spectra or
//! resolvent evaluation is written against [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar: exact for rationals, rounded for floats.
pub trait Scalar:
    Num
    + Signed
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from a small integer count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
