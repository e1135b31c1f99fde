//! Floating point scalar abstraction shared by the numeric code.
//!
//! The regressors, metrics and correlation routines are written once against
//! [`Scalar`] and instantiated for `f32` and `f64`. The corpus and feature
//! layers always produce `f64`; models convert at the boundary.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; used for constants and for data coming
    /// out of the feature layer.
    fn of(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean computed as an offset from the first element.
///
/// For a slice of identical values the result is exactly that value, which
/// keeps constant-target fixpoints exact.
pub fn shifted_mean<T: Scalar>(values: &[T]) -> Option<T> {
    let first = *values.first()?;
    let offset: T = values.iter().map(|&v| v - first).sum();
    Some(first + offset / T::of_usize(values.len()))
}

/// Mean of the non-NaN entries; `None` when every entry is missing.
pub fn nan_mean<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let present: Vec<T> = values.into_iter().filter(|v| !v.is_nan()).collect();
    shifted_mean(&present)
}
