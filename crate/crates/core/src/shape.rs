//! Grid-based shape diagnostics: profit concavity, regularity and MHR.
//!
//! These are necessary-condition checks on sampled points, not proofs.
//! Concavity is tested on the right-continuous profit `(p − c)(1 − F(p))`, so
//! an atom at the top of the support shows up as a drop to zero.

use crate::distribution::{DistributionKind, SegmentDistribution};
use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::scalar::Scalar;

const SHAPE_REL_TOL: f64 = 1e-9;
const PIECE_SAMPLES: usize = 16;
const MIN_GRID: usize = 16;
const ROUNDING_ULPS: f64 = 16.0;

/// Outcome of a check that needs a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    NotEvaluable,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "true",
            Verdict::Fails => "false",
            Verdict::NotEvaluable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDiagnosis {
    pub concave_profit: Vec<bool>,
    pub regular: Vec<Verdict>,
    pub mhr: Vec<Verdict>,
    pub common_support: bool,
    /// Number of grid points actually evaluated, summed over segments.
    pub grid_used: usize,
}

impl ShapeDiagnosis {
    /// Concave profits on a common bounded support.
    pub fn meets_half_guarantee_hypotheses(&self) -> bool {
        self.common_support && self.concave_profit.iter().all(|&c| c)
    }
}

/// Upper end used for sampling unbounded supports: twice the largest finite kink.
fn sampling_cap<T: Scalar>(m: &MarketInstance<T>) -> T {
    let top = m.segments().iter().flat_map(|s| s.dist.breakpoints()).filter(|b| b.is_finite()).fold(m.cost(), T::max);
    if top > T::zero() {
        top * T::lit(2.0)
    } else {
        T::one()
    }
}

fn sample_points<T: Scalar>(dist: &SegmentDistribution<T>, lo: T, hi: T, grid_n: usize) -> Vec<T> {
    let mut anchors: Vec<T> = vec![lo, hi];
    anchors.extend(dist.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    if let DistributionKind::Piecewise(s) = dist.kind() {
        for i in 0..s.pieces().len() {
            let (a, b) = s.piece_span(i);
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a {
                for j in 1..=PIECE_SAMPLES {
                    anchors.push(a + (b - a) * T::from_usize(j) / T::from_usize(PIECE_SAMPLES + 1));
                }
            }
        }
    }
    sort_dedup(&mut anchors);

    let step = (hi - lo) / T::from_usize(grid_n - 1);
    let near = step * T::lit(1e-2);
    let mut pts = anchors.clone();
    for i in 1..grid_n - 1 {
        let x = lo + step * T::from_usize(i);
        let j = anchors.partition_point(|&a| a < x);
        let close_above = j < anchors.len() && anchors[j] - x < near;
        let close_below = j > 0 && x - anchors[j - 1] < near;
        if !close_above && !close_below {
            pts.push(x);
        }
    }
    sort_dedup(&mut pts);
    pts
}

fn sort_dedup<T: Scalar>(v: &mut Vec<T>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
}

/// Slopes of successive chords must be nonincreasing.
fn chords_concave<T: Scalar>(xs: &[T], ys: &[T]) -> bool {
    if xs.len() < 3 {
        return true;
    }
    let range = xs[xs.len() - 1] - xs[0];
    let ymax = ys.iter().fold(T::zero(), |m, y| m.max(y.abs()));
    let scale = ymax / range;
    let tol = T::tol(SHAPE_REL_TOL);
    let ulps = T::epsilon() * T::lit(ROUNDING_ULPS);
    let chords: Vec<(T, T)> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| {
            let dx = x[1] - x[0];
            // slope and the part of it that rounding in y alone can produce
            ((y[1] - y[0]) / dx, ulps * (y[0].abs() + y[1].abs()) / dx)
        })
        .collect();
    chords.windows(2).all(|w| {
        let ((s0, n0), (s1, n1)) = (w[0], w[1]);
        s1 <= s0 + tol * s0.abs().max(s1.abs()).max(scale) + n0 + n1
    })
}

/// An atom above cost makes the profit drop at the atom, which no concave
/// function does in the interior, and which is the drop to zero at the top.
fn has_profit_jump<T: Scalar>(dist: &SegmentDistribution<T>, c: T) -> bool {
    dist.atoms().into_iter().any(|a| a > c && (a - c) * (dist.survival(a) - dist.survival_open(a)) > T::zero())
}

/// Concavity of `(p − c)(1 − F(p))` sampled on `[c, hi]`.
pub(crate) fn profit_concave_on<T: Scalar>(dist: &SegmentDistribution<T>, c: T, hi: T, grid_n: usize) -> bool {
    if !(hi > c) {
        return true;
    }
    if has_profit_jump(dist, c) {
        return false;
    }
    let pts = sample_points(dist, c, hi, grid_n.max(MIN_GRID));
    let ys: Vec<T> = pts.iter().map(|&p| (p - c) * dist.survival_open(p)).collect();
    chords_concave(&pts, &ys)
}

/// Regular (φ nondecreasing) and MHR ((1−F)/f nonincreasing) on the sampled points.
///
/// Both use the same slack so that MHR implies regular point by point.
fn hazard_checks<T: Scalar>(dist: &SegmentDistribution<T>, pts: &[T]) -> (Verdict, Verdict) {
    if !dist.has_density() {
        return (Verdict::NotEvaluable, Verdict::NotEvaluable);
    }
    let (lo, hi) = (dist.support_lo(), dist.support_hi());
    let mut samples: Vec<(T, T)> = Vec::new();
    for &p in pts {
        if p <= lo || p >= hi {
            continue;
        }
        if let Some(f) = dist.density(p) {
            if f > T::zero() && f.is_finite() {
                samples.push((p, dist.survival_open(p) / f));
            }
        }
    }
    if samples.len() < 2 {
        return (Verdict::NotEvaluable, Verdict::NotEvaluable);
    }
    let pscale = samples[samples.len() - 1].0 - samples[0].0;
    let tol = T::tol(SHAPE_REL_TOL);
    let mut regular = true;
    let mut mhr = true;
    for w in samples.windows(2) {
        let ((p0, h0), (p1, h1)) = (w[0], w[1]);
        let slack = tol * (p1.abs() + h0.abs() + h1.abs() + pscale);
        let dh = h1 - h0;
        if dh > slack {
            mhr = false;
        }
        if (p1 - p0) - dh < -slack {
            regular = false;
        }
    }
    let v = |b: bool| if b { Verdict::Holds } else { Verdict::Fails };
    (v(regular), v(mhr))
}

/// Samples each segment on `[c, sup Θ_k]` (unbounded supports are cut at twice
/// the largest finite kink) with `grid_n` uniform points plus every breakpoint.
pub fn diagnose_shape<T: Scalar>(m: &MarketInstance<T>, grid_n: usize) -> Result<ShapeDiagnosis> {
    if grid_n < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid_n must be at least {MIN_GRID}, got {grid_n}")));
    }
    let cap = sampling_cap(m);
    let c = m.cost();
    let mut out = ShapeDiagnosis {
        concave_profit: Vec::with_capacity(m.k()),
        regular: Vec::with_capacity(m.k()),
        mhr: Vec::with_capacity(m.k()),
        common_support: m.common_support_hi().is_some(),
        grid_used: 0,
    };
    for seg in m.segments() {
        let d = &seg.dist;
        let hi = if d.support_hi().is_finite() { d.support_hi() } else { cap };
        if !(hi > c) {
            out.concave_profit.push(true);
            out.regular.push(Verdict::NotEvaluable);
            out.mhr.push(Verdict::NotEvaluable);
            continue;
        }
        let pts = sample_points(d, c, hi, grid_n);
        let ys: Vec<T> = pts.iter().map(|&p| (p - c) * d.survival_open(p)).collect();
        out.concave_profit.push(!has_profit_jump(d, c) && chords_concave(&pts, &ys));
        let (r, h) = hazard_checks(d, &pts);
        out.regular.push(r);
        out.mhr.push(h);
        out.grid_used += pts.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Segment;
    use proptest::prelude::*;

    fn single(d: SegmentDistribution<f64>) -> MarketInstance<f64> {
        MarketInstance::new(vec![Segment::new(1.0, d)], 0.0).unwrap()
    }

    #[test]
    fn uniform_is_concave_regular_mhr() {
        let d = diagnose_shape(&single(SegmentDistribution::uniform(0.0, 1.0).unwrap()), 16).unwrap();
        assert_eq!(d.concave_profit, vec![true]);
        assert_eq!(d.regular, vec![Verdict::Holds]);
        assert_eq!(d.mhr, vec![Verdict::Holds]);
        assert!(d.common_support);
    }

    #[test]
    fn triangular_is_regular_not_concave_not_mhr() {
        let d = diagnose_shape(&single(SegmentDistribution::triangular(1.0, 0.5).unwrap()), 200).unwrap();
        assert_eq!(d.concave_profit, vec![false]);
        assert_eq!(d.regular, vec![Verdict::Holds]);
        assert_eq!(d.mhr, vec![Verdict::Fails]);
    }

    #[test]
    fn truncated_exponential_is_mhr() {
        let d = diagnose_shape(&single(SegmentDistribution::truncated_exponential(5.0, 10.0).unwrap()), 1000).unwrap();
        assert_eq!(d.mhr, vec![Verdict::Holds]);
        assert_eq!(d.regular, vec![Verdict::Holds]);
    }

    #[test]
    fn atoms_are_not_evaluable() {
        let d = diagnose_shape(&single(SegmentDistribution::dirac(0.5).unwrap()), 16).unwrap();
        assert_eq!(d.regular, vec![Verdict::NotEvaluable]);
        assert_eq!(d.mhr, vec![Verdict::NotEvaluable]);
    }

    #[test]
    fn small_grid_rejected() {
        let m = single(SegmentDistribution::uniform(0.0, 1.0).unwrap());
        assert!(matches!(diagnose_shape(&m, 15), Err(Error::InvalidArgument(_))));
    }

    proptest! {
        #[test]
        fn uniform_concave_regular_any_grid(n in 16usize..400, lo in 0.0f64..3.0, w in 0.01f64..10.0, cf in 0.0f64..0.99) {
            let hi = lo + w;
            let m = MarketInstance::new(vec![Segment::new(1.0, SegmentDistribution::uniform(lo, hi).unwrap())], cf * hi).unwrap();
            let d = diagnose_shape(&m, n).unwrap();
            prop_assert!(d.concave_profit[0]);
            prop_assert_eq!(d.regular[0], Verdict::Holds);
        }

        #[test]
        fn mhr_implies_regular(rate in 0.05f64..20.0, cap in 0.5f64..20.0, peak in 0.1f64..5.0, q in 0.05f64..1.0) {
            for dist in [
                SegmentDistribution::truncated_exponential(rate, cap).unwrap(),
                SegmentDistribution::triangular(peak, q).unwrap(),
                SegmentDistribution::uniform(0.0, cap).unwrap(),
            ] {
                let d = diagnose_shape(&single(dist), 64).unwrap();
                prop_assert!(!d.mhr[0].holds() || d.regular[0].holds());
            }
        }
    }
}
