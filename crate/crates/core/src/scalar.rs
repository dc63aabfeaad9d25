//! The floating-point abstraction every numeric routine in the crate is written against.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type used for coordinates, costs and spline coefficients.
///
/// Implemented for `f32` and `f64`. The algorithms need `ln`, `atan2` and
/// `sqrt`, so exact rational types are not supported.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean of a slice, `None` when empty.
pub(crate) fn mean<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut n = 0usize;
    let mut sum = T::zero();
    for v in values {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / T::count(n))
}
