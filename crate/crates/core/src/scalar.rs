//! Scalar abstraction.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers and theory functions are generic over.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only if the type cannot represent finite values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar type must represent f64 literals")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar type must represent usize values")
    }

    fn infinity() -> Self;
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
}

/// Squared Euclidean norm.
pub(crate) fn norm_sq<T: Real>(v: &nalgebra::DVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

/// Squared Euclidean distance between two vectors of equal length.
pub(crate) fn dist_sq<T: Real>(a: &nalgebra::DVector<T>, b: &nalgebra::DVector<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}
