//! Composite Simpson quadrature with breakpoint splitting.
//!
//! Integrands receive a flag telling them whether the point is the left end of
//! a subinterval, so piecewise functions with jumps at the breakpoints can
//! return their right limit there.

use crate::scalar::Scalar;

/// Ratio `b / a` above which a subinterval is integrated in `ln z`.
const LOG_SUBST_RATIO: f64 = 64.0;

/// Composite Simpson on `[a, b]` with `n` panels (rounded up to even, at least 2).
pub fn simpson<T: Scalar>(f: impl Fn(T, bool) -> T, a: T, b: T, n: usize) -> T {
    let n = n.max(2).next_multiple_of(2);
    let h = (b - a) / T::from_usize(n);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut s = f(a, true) + f(b, false);
    for i in 1..n {
        let x = a + h * T::from_usize(i);
        s = s + f(x, false) * if i % 2 == 1 { four } else { two };
    }
    s * h / T::lit(3.0)
}

/// Options for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadOptions {
    /// Total number of Simpson panels, spread over the subintervals.
    pub panels: usize,
    /// Integrate wide subintervals (`b / a > 64`, `a > 0`) in `ln z`.
    pub log_substitution: bool,
}

/// `∫_a^b f`, split at every breakpoint strictly inside `(a, b)`.
///
/// Panels are distributed over subintervals in proportion to their length,
/// each getting at least two; log-substituted pieces get at least a quarter.
pub fn integrate<T: Scalar>(f: impl Fn(T, bool) -> T, a: T, b: T, breaks: &[T], opts: QuadOptions) -> T {
    if !(b > a) {
        return T::zero();
    }
    let mut nodes = vec![a];
    let mut inner: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    inner.dedup();
    nodes.extend(inner);
    nodes.push(b);

    let wide = |lo: T, hi: T| opts.log_substitution && lo > T::zero() && hi / lo > T::lit(LOG_SUBST_RATIO);

    let mut sum = T::zero();
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let share = ((hi - lo) / (b - a)).to_f64_lossy();
        let mut n = ((opts.panels as f64) * share).round() as usize;
        if wide(lo, hi) {
            n = n.max(opts.panels / 4);
            let g = |u: T, left: bool| {
                let z = if left { lo } else { u.exp().max(lo).min(hi) };
                f(z, left) * z
            };
            let (ua, ub) = (lo.ln(), hi.ln());
            sum = sum + simpson(g, ua, ub, n);
        } else {
            sum = sum + simpson(&f, lo, hi, n);
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wide::WideFloat;
    use num_traits::Float;

    const PLAIN: QuadOptions = QuadOptions { panels: 512, log_substitution: false };

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x: f64, _| x * x * x - 2.0 * x, 0.0, 2.0, 2);
        assert!((v - 0.0).abs() < 1e-14);
        let v = simpson(|x: f64, _| x * (1.0 - x), 0.0, 1.0, 2);
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn jump_is_handled_by_splitting() {
        // step from 1 to 0 at 0.3; value at 0.3 is the left one
        let f = |x: f64, left: bool| if x < 0.3 || (x == 0.3 && !left) { 1.0 } else { 0.0 };
        let v = integrate(f, 0.0, 1.0, &[0.3], PLAIN);
        assert!((v - 0.3).abs() < 1e-14, "{v}");
    }

    #[test]
    fn log_substitution_on_reciprocal() {
        let opts = QuadOptions { panels: 256, log_substitution: true };
        let v = integrate(|x: f64, _| 1.0 / x, 1.0, 1e8, &[], opts);
        assert!((v - 1e8f64.ln()).abs() < 1e-12);
        let hi = WideFloat::lit(2000.0).exp();
        let v = integrate(|x: WideFloat, _| WideFloat::lit(1.0) / x, WideFloat::lit(1.0), hi, &[], opts);
        assert!((v.to_f64() - 2000.0).abs() < 1e-9);
    }
}
