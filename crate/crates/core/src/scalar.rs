//! Scalar abstractions.
//!
//! Everything numerical in this crate is written against [`Real`] (a real
//! floating point type) or [`Field`] (real or complex entries of a linear
//! system). Both `f32` and `f64` implement [`Real`]; the verification
//! tolerances used by the pipeline assume `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point scalar.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Entry type of a linear system: a real or a complex number.
pub trait Field:
    Copy + NumAssign + Neg<Output = Self> + Debug + Send + Sync + 'static
{
    type Real: Real;

    fn modulus(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
    fn conj(self) -> Self;
}

impl<T: Real> Field for T {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.abs()
    }
    #[inline]
    fn from_real(r: T) -> T {
        r
    }
    #[inline]
    fn conj(self) -> T {
        self
    }
}

impl<T: Real> Field for Complex<T> {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}

/// Shorthand for `T::lit(x)`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}
