use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the solver is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// `max(requested, factor * eps)`, so tolerances stay attainable in low precision.
    #[inline]
    fn tol(requested: f64, factor: f64) -> Self {
        Self::lit(requested).max(Self::lit(factor) * Self::epsilon())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `(e^z − 1)/z` with the removable singularity filled in.
pub(crate) fn exprel<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r < T::lit(0.5) {
        // Taylor: sum z^n/(n+1)!
        let mut term = Complex::new(T::one(), T::zero());
        let mut sum = term;
        for n in 1..40 {
            term = term * z / T::lit((n + 1) as f64);
            sum = sum + term;
            if term.norm() <= T::epsilon() * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - T::one()) / z
    }
}

/// `(e^z − 1 − z)/z²`.
pub(crate) fn exprel2<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = z.norm();
    if r < T::one() {
        let mut term = Complex::new(T::lit(0.5), T::zero());
        let mut sum = term;
        for n in 1..60 {
            term = term * z / T::lit((n + 2) as f64);
            sum = sum + term;
            if term.norm() <= T::epsilon() * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - T::one() - z) / (z * z)
    }
}

/// `(e^{za} − e^{wa})/(z − w)`, stable when `z ≈ w`.
pub(crate) fn divided_exp<T: Real>(z: Complex<T>, w: Complex<T>, a: T) -> Complex<T> {
    (w * a).exp() * exprel((z - w) * a) * a
}
