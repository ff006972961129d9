//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point type the field and plate machinery is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or constant into this type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value representable in target float")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in target float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut t = theta % two_pi;
    if t <= -T::PI() {
        t += two_pi;
    } else if t > T::PI() {
        t -= two_pi;
    }
    t
}

/// Wraps an angle into [0, period).
pub fn wrap_period<T: Real>(theta: T, period: T) -> T {
    let mut t = theta % period;
    if t < T::zero() {
        t += period;
    }
    if t >= period {
        t -= period;
    }
    t
}

/// Smallest signed difference between two angles modulo `period`.
pub fn angular_distance<T: Real>(a: T, b: T, period: T) -> T {
    let half = period / T::of(2.0);
    let d = wrap_period(a - b + half, period) - half;
    d.abs()
}

/// `sin(pi x)` that is exactly zero for integer `x`.
pub fn sin_pi<T: Real>(x: T) -> T {
    if x.fract() == T::zero() {
        T::zero()
    } else {
        (T::PI() * x).sin()
    }
}

pub fn is_integer<T: Real>(x: T) -> bool {
    x.fract() == T::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-5.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25f32), 0.25f32);
    }

    #[test]
    fn sin_pi_exact_on_integers() {
        for m in -6..=6 {
            assert_eq!(sin_pi(m as f64), 0.0);
        }
        assert!((sin_pi(0.5f64) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn angular_distance_is_periodic() {
        assert!((angular_distance(0.1, PI - 0.1, PI) - 0.2).abs() < 1e-12);
        assert!((angular_distance(2.0 * PI - 0.01, 0.01, 2.0 * PI) - 0.02).abs() < 1e-12);
    }
}
