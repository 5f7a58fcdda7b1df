//! Scalar abstraction shared by every numerical routine.
//!
//! All operators and parameter types are generic over [`Real`], which is
//! implemented for `f32` and `f64`. Physical inputs (Hz, seconds) are always
//! parsed as `f64` and converted once when an operator is built.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar backing the simulator (`f32` or `f64`).
pub trait Real:
    RealField + Copy + Default + ToPrimitive + Serialize + DeserializeOwned + Send + Sync
{
    /// Entrywise tolerance used for structural checks (Hermiticity, unitarity).
    fn structural_tolerance() -> Self;
}

impl Real for f64 {
    fn structural_tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn structural_tolerance() -> Self {
        1e-4
    }
}

/// Complex scalar over `T`.
pub type Cplx<T> = Complex<T>;

/// Converts an `f64` literal or physical parameter into `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

/// Converts `T` back into `f64`.
#[inline]
pub fn as_f64<T: Real>(v: T) -> f64 {
    v.to_f64().expect("finite scalar")
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Cplx<T> {
    Complex::new(T::one(), T::zero())
}

/// `exp(-i * phase)`.
#[inline]
pub(crate) fn phase_factor<T: Real>(phase: T) -> Cplx<T> {
    Complex::new(phase.cos(), -phase.sin())
}
