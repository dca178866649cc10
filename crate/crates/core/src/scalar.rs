//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra as na;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point type the simulator is generic over (`f32` or `f64`).
///
/// Only the `nalgebra` real-field operations are used on values; conversion
/// goes through `num-traits` so literals can be written as `f64`.
pub trait Real:
    na::RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + std::fmt::Display
    + std::fmt::LowerExp
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Converts a count or index.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Complex<T> = na::Complex<T>;

/// Dense complex matrix.
pub type CMatrix<T> = na::DMatrix<Complex<T>>;

/// Dense complex column vector.
pub type CVector<T> = na::DVector<Complex<T>>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Principal square root of a real number, continued to the imaginary axis
/// for negative arguments: `sqrt(-x) = i sqrt(x)`.
#[inline]
pub(crate) fn sqrt_continued<T: Real>(x: T) -> Complex<T> {
    if x >= T::zero() {
        creal(x.sqrt())
    } else {
        cplx(T::zero(), (-x).sqrt())
    }
}

/// `e^z` over a generic scalar.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.re.exp();
    Complex::new(r * z.im.cos(), r * z.im.sin())
}

/// Modulus of a complex number over a generic scalar (`num_complex`'s own
/// `norm` needs `num_traits::Float`).
pub trait Modulus<T> {
    fn modulus(self) -> T;
}

impl<T: Real> Modulus<T> for Complex<T> {
    #[inline]
    fn modulus(self) -> T {
        self.re.hypot(self.im)
    }
}

impl<T: Real> Modulus<T> for &Complex<T> {
    #[inline]
    fn modulus(self) -> T {
        self.re.hypot(self.im)
    }
}

/// Principal square root of a complex number.
#[inline]
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    na::ComplexField::sqrt(z)
}
