//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the laboratory is generic over.
///
/// Implemented for `f64` (the reference precision every tolerance in the
/// acceptance suite is pinned against) and `f32`.
pub trait Scalar:
    RealField + Copy + ToPrimitive + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Feasibility tolerance used by the LP solver and cone membership tests.
    const FEASTOL: f64;
    /// Pivot tolerance of the simplex method.
    const PIVTOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn from_usize(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn feastol() -> Self {
        Self::lit(Self::FEASTOL)
    }

    #[inline]
    fn pivtol() -> Self {
        Self::lit(Self::PIVTOL)
    }

    #[inline]
    fn finite(self) -> bool {
        self.to_f64().is_finite()
    }
}

impl Scalar for f64 {
    const FEASTOL: f64 = 1e-9;
    const PIVTOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const FEASTOL: f64 = 1e-5;
    const PIVTOL: f64 = 1e-7;
}
