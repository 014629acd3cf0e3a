use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field sample type. Real fields are used for cavity runs; complex fields
/// carry Bloch phases for band-structure runs.
pub trait FieldScalar:
    Copy
    + Default
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const COMPLEX: bool;

    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn norm_sqr(self) -> f64;
    /// `Re(self · conj(other))`.
    fn dot_re(self, other: Self) -> f64;
    /// Multiplies by a unit phase. Real fields only accept phases ±1.
    fn times_phase(self, phase: Complex64) -> Self;
    fn is_finite(self) -> bool;
    fn to_complex(self) -> Complex64;
}

impl FieldScalar for f64 {
    const COMPLEX: bool = false;

    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn dot_re(self, other: Self) -> f64 {
        self * other
    }
    #[inline]
    fn times_phase(self, phase: Complex64) -> Self {
        debug_assert!(phase.im.abs() < 1e-12, "real field with complex phase");
        self * phase.re
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl FieldScalar for Complex64 {
    const COMPLEX: bool = true;

    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn dot_re(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
    #[inline]
    fn times_phase(self, phase: Complex64) -> Self {
        self * phase
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
}
