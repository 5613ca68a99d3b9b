//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything numeric in this crate is written against this trait. The
/// nalgebra bound supplies the elementary functions and decompositions, the
/// DCT bound lets the spectral Laplacian solver run through `rustdct`.
pub trait Real: RealField + Copy + FromPrimitive + rustdct::DctNum {
    /// Machine epsilon of the underlying type.
    fn epsilon() -> Self;
    /// Whether the value is neither infinite nor NaN.
    fn finite(self) -> bool;
}

impl Real for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count into `T`.
#[inline(always)]
pub fn from_usize<T: Real>(k: usize) -> T {
    nalgebra::convert(k as f64)
}

/// Lossy conversion to `f64`, used for reporting.
#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

/// Modulus of a complex number over any [`Real`].
#[inline(always)]
pub fn cabs<T: Real>(z: num_complex::Complex<T>) -> T {
    z.re.hypot(z.im)
}
