//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the kernels and spectral routines are generic over.
///
/// Implemented for `f64` (the precision every documented tolerance is
/// calibrated for) and `f32`. Tolerances are written as `f64` literals and
/// passed through [`Scalar::tol`], which lifts them to the coarsest value
/// the type can actually resolve.
pub trait Scalar:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Serialize
    + DeserializeOwned
    + fmt::LowerExp
{
    /// Smallest absolute tolerance that is meaningful at this precision.
    const TOLERANCE_FLOOR: f64;

    /// Converts a finite `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal is representable")
    }

    /// Tolerance `value`, raised to [`Scalar::TOLERANCE_FLOOR`] if needed.
    fn tol(value: f64) -> Self {
        Self::lit(value.max(Self::TOLERANCE_FLOOR))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize is representable")
    }

    /// `|self|`. Spelled out because `RealField` and `Signed` both export `abs`.
    fn magnitude(self) -> Self {
        Signed::abs(&self)
    }
}

impl Scalar for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;
}

impl Scalar for f32 {
    const TOLERANCE_FLOOR: f64 = 1e-5;
}
