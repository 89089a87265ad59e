//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::Float;

use crate::wide::WideFloat;

/// Floating-point scalar: `f32`, `f64` or [`WideFloat`].
pub trait Scalar: Float + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self;

    /// Lossy conversion to `f64` (saturates to `±inf`/`0` outside the f64 range).
    fn to_f64_lossy(self) -> f64;

    /// A tolerance at least `base`, widened for types with coarse mantissas.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(64.0))
    }

    fn from_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Scalar for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }

    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn lit(x: f64) -> Self {
        x
    }

    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for WideFloat {
    fn lit(x: f64) -> Self {
        WideFloat::from_f64(x)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64()
    }
}

/// Compact decimal rendering: plain notation for moderate magnitudes,
/// scientific otherwise. Parses back to the same value for `f64`.
pub fn display_compact<T: Scalar>(x: T) -> String {
    let f = x.to_f64_lossy();
    if !f.is_finite() || (f != 0.0 && f.abs() < f64::MIN_POSITIVE) {
        return x.to_string();
    }
    if f == 0.0 || (1e-5..1e16).contains(&f.abs()) {
        format!("{f}")
    } else {
        format!("{f:e}")
    }
}

/// `|a - b| <= tol * max(|a|, |b|, 1)`.
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= tol * scale
}

/// Relative closeness without the unit floor.
pub fn rel_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= tol * scale
}
