//! Scalar abstraction shared by the algebraic substrate.
//!
//! Every polynomial, transfer function, realization and hybrid filter is
//! generic over [`Scalar`], which is implemented for `f32` and `f64`. The
//! estimators and the Monte Carlo harness are written against `f64` only,
//! through the aliases exported at the crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable throughout the LTI and filtering layers.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Machine epsilon of the underlying type.
    fn eps() -> Self;
}

impl Scalar for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` into `f64`.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Modulus of a complex number over a generic real field.
#[inline]
pub fn cabs<T: Scalar>(z: num_complex::Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Complex exponential over a generic real field.
#[inline]
pub fn cexp<T: Scalar>(z: num_complex::Complex<T>) -> num_complex::Complex<T> {
    let r = z.re.exp();
    num_complex::Complex::new(r * z.im.cos(), r * z.im.sin())
}
