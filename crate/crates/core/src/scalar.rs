//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar the library is generic over (`f32`, `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts an integer coefficient into the scalar type.
    #[inline]
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("integer coefficient")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Golden mean `(1 + sqrt 5) / 2`.
    #[inline]
    fn golden() -> Self {
        (Self::one() + Self::lit(5.0).sqrt()) / Self::lit(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Volume of the closed unit ball in `R^n`.
pub fn unit_ball_volume<T: Scalar>(n: usize) -> T {
    // V_0 = 1, V_1 = 2, V_n = 2 pi / n * V_{n-2}
    let two_pi = T::lit(2.0) * T::PI();
    let mut v = if n % 2 == 0 { T::one() } else { T::lit(2.0) };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v = v * two_pi / T::int(k as i64);
        k += 2;
    }
    v
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area<T: Scalar>(n: usize) -> T {
    T::int(n as i64) * unit_ball_volume::<T>(n)
}

/// Volume of the closed ball of radius `r` in `R^n`.
pub fn ball_volume<T: Scalar>(n: usize, r: T) -> T {
    unit_ball_volume::<T>(n) * r.powi(n as i32)
}
