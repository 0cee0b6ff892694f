//! Scalar abstraction for the numeric core.
//!
//! Everything downstream is generic over a floating-point scalar `T: Real`.
//! The trait bundles the num-traits bounds the math needs plus a few
//! per-type tolerance constants, so f32 instantiations get looser checks
//! than f64 without threading epsilons through every call site.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable by the core numerics.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Tolerance for "this vector is normalised" checks.
    const NORM_TOL: Self;
    /// Tolerance for hermiticity / unitarity checks on operators.
    const HERM_TOL: Self;
    /// Target for driving the parallel residual coefficient to zero.
    const GAUGE_TOL: Self;
    /// Error function, exact to scalar precision.
    fn erf(self) -> Self;
}

impl Real for f64 {
    const NORM_TOL: Self = 1e-10;
    const HERM_TOL: Self = 1e-10;
    const GAUGE_TOL: Self = 1e-8;
    fn erf(self) -> Self {
        libm::erf(self)
    }
}

impl Real for f32 {
    const NORM_TOL: Self = 1e-4;
    const HERM_TOL: Self = 1e-4;
    const GAUGE_TOL: Self = 1e-3;
    fn erf(self) -> Self {
        libm::erff(self)
    }
}

/// Complex number over the generic scalar.
pub type C<T> = Complex<T>;

/// Converts an f64 literal into the working scalar.
///
/// Panics only if the target type cannot represent finite f64 values at
/// all, which no `Real` implementor triggers.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Imaginary unit.
#[inline]
pub fn i<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Complex number with zero imaginary part.
#[inline]
pub fn cre<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
