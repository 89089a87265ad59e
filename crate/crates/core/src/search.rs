//! One-dimensional maximization helpers.

use crate::scalar::Scalar;

/// Relative tolerance under which two profits count as tied.
pub const TIE_REL_TOL: f64 = 1e-12;

const GOLDEN_MAX_ITER: usize = 200_000;

/// Running argmax that prefers the lowest price among ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Best<T> {
    pub price: T,
    pub value: T,
}

impl<T: Scalar> Best<T> {
    pub fn new(price: T, value: T) -> Self {
        Best { price, value }
    }

    pub fn offer(&mut self, price: T, value: T) {
        if value.is_nan() {
            return;
        }
        let tied = (value - self.value).abs() <= T::lit(TIE_REL_TOL) * value.abs().max(self.value.abs());
        if tied {
            if price < self.price {
                self.price = price;
                self.value = value;
            }
        } else if value > self.value || self.value.is_nan() {
            self.price = price;
            self.value = value;
        }
    }

    /// Replaces the incumbent only on an improvement beyond the tie tolerance.
    /// Used for search iterates so an exact candidate is not displaced by a
    /// nearby point that is equal up to rounding.
    pub fn offer_if_better(&mut self, price: T, value: T) {
        let margin = T::lit(TIE_REL_TOL) * value.abs().max(self.value.abs());
        if value - self.value > margin || (self.value.is_nan() && !value.is_nan()) {
            self.price = price;
            self.value = value;
        }
    }

    pub fn merge(mut self, other: Best<T>) -> Self {
        self.offer(other.price, other.value);
        self
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive (`n >= 2`).
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / T::from_usize(n - 1);
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize(i) }).collect()
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `rel_tol` times the larger endpoint
/// magnitude. The endpoints are never returned; callers evaluate them as
/// candidates themselves.
pub fn golden_max<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, rel_tol: T) -> Best<T> {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - (b - a) * inv_phi;
    let mut x2 = a + (b - a) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_MAX_ITER {
        let width = b - a;
        let scale = a.abs().max(b.abs()).max(T::min_positive_value());
        if width <= rel_tol * scale || x1 >= x2 {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * inv_phi;
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * inv_phi;
            f2 = f(x2);
        }
    }
    let mut best = Best::new(x1, f1);
    best.offer(x2, f2);
    best
}
