//! Scalar abstraction shared by every numerical module.
//!
//! All physics in this crate is written once against [`Real`] and
//! instantiated for `f64` (the default everywhere) and `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
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
    /// Converts a literal. Every `f64` is representable (possibly rounded)
    /// in every implementor, so this never fails.
    fn of(x: f64) -> Self;

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    fn as_f64(self) -> f64;

    /// Relative machine precision.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            #[inline]
            fn of(x: f64) -> Self {
                x as $f
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::of(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::of(6.0) + x2 * x2 / T::of(120.0)
    } else {
        x.sin() / x
    }
}

/// Trapezoidal weights for `n` equally spaced nodes with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n > 1 {
        w[0] = h / T::of(2.0);
        w[n - 1] = h / T::of(2.0);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_branches_agree_near_switch() {
        let x = 1e-4_f64;
        let series = 1.0 - x * x / 6.0 + x.powi(4) / 120.0;
        assert!((series - x.sin() / x).abs() < 4e-16);
        assert_eq!(sinc(0.0_f64), 1.0);
        assert!((sinc(0.5_f32) - 0.5_f32.sin() / 0.5).abs() < 1e-7);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let w = trapezoid_weights(11, 0.1_f64);
        let s: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64 * 0.1)).sum();
        assert!((s - 0.5).abs() < 1e-15);
    }
}
