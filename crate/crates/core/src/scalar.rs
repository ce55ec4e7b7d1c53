//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Every finite literal is representable
    /// (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }

    /// Smallest tolerance that is meaningful for this type: `max(floor, 64 eps)`.
    #[inline]
    fn tol_floor(floor: f64) -> Self {
        Self::lit(floor).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|t|^p`.
#[inline]
pub fn abs_pow<T: Real>(t: T, p: T) -> T {
    if t == T::zero() {
        T::zero()
    } else {
        t.abs().powf(p)
    }
}

/// `|t|^(q-1) t`, continuous at zero for `q > 1`.
#[inline]
pub fn signed_pow<T: Real>(t: T, q: T) -> T {
    if t == T::zero() {
        T::zero()
    } else {
        t.abs().powf(q - T::one()) * t.signum()
    }
}

/// `max(t, 0)`
#[inline]
pub fn pos<T: Real>(t: T) -> T {
    t.max(T::zero())
}

/// `max(-t, 0)`
#[inline]
pub fn neg<T: Real>(t: T) -> T {
    (-t).max(T::zero())
}
