//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    /// Machine epsilon scaled for default tolerances.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// ln(1 + √2), the recurring Onsager constant.
#[inline]
pub(crate) fn ln_one_plus_sqrt2<T: Real>() -> T {
    (T::one() + T::SQRT_2()).ln()
}
