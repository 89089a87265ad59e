//! Named instance families with known profit ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::distribution::{PiecewiseSurvival, SegmentDistribution, SurvivalPiece};
use crate::error::{Error, Result};
use crate::market::{MarketInstance, Segment};
use crate::scalar::{display_compact, Scalar};

const BISECTION_REL_TOL: f64 = 1e-12;
const KAPPA_START: f64 = 0.5;
const KAPPA_HALVINGS: usize = 60;
const STAIRCASE_LAST_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    TightPair,
    UnboundedFlat,
    Staircase,
    TriangularRegular,
    TruncExpMhr,
    DiracWorstCase,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::TightPair,
        Family::UnboundedFlat,
        Family::Staircase,
        Family::TriangularRegular,
        Family::TruncExpMhr,
        Family::DiracWorstCase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::TightPair => "tight-pair",
            Family::UnboundedFlat => "unbounded-flat",
            Family::Staircase => "staircase",
            Family::TriangularRegular => "triangular",
            Family::TruncExpMhr => "trunc-exp",
            Family::DiracWorstCase => "dirac",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
            Error::InvalidArgument(format!("unknown family `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// Parameters of a named family. Fields a family does not use are ignored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstructionParams {
    pub family: Option<Family>,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub a: Option<f64>,
    pub l_cap: Option<f64>,
    pub kappa: Option<f64>,
    pub peaks: Option<Vec<f64>>,
}

impl ConstructionParams {
    pub fn new(family: Family) -> Self {
        ConstructionParams { family: Some(family), ..Default::default() }
    }

    fn need<V: Copy>(v: Option<V>, name: &str, family: Family) -> Result<V> {
        v.ok_or_else(|| Error::InvalidArgument(format!("family {family} needs parameter `{name}`")))
    }

    pub fn family(&self) -> Result<Family> {
        self.family.ok_or_else(|| Error::InvalidArgument("no family given".into()))
    }

    pub fn build<T: Scalar>(&self) -> Result<Construction<T>> {
        let fam = self.family()?;
        match fam {
            Family::TightPair => {
                let a = Self::need(self.a, "a", fam)?;
                let eps = Self::need(self.epsilon, "epsilon", fam)?;
                tight_pair(T::lit(a), T::lit(eps), self.kappa.map(T::lit))
            }
            Family::UnboundedFlat => match &self.peaks {
                Some(p) => unbounded_flat(&p.iter().map(|&x| T::lit(x)).collect::<Vec<_>>()),
                None => unbounded_flat_default(Self::need(self.k, "k", fam)?),
            },
            Family::Staircase => staircase(Self::need(self.k, "k", fam)?),
            Family::TriangularRegular => triangular_regular(Self::need(self.k, "k", fam)?),
            Family::TruncExpMhr => {
                trunc_exp_mhr(Self::need(self.k, "k", fam)?, T::lit(Self::need(self.l_cap, "l_cap", fam)?))
            }
            Family::DiracWorstCase => {
                dirac_worst_case(Self::need(self.k, "k", fam)?, T::lit(Self::need(self.epsilon, "epsilon", fam)?))
            }
        }
    }
}

/// A generated market with the solved parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction<T> {
    pub market: MarketInstance<T>,
    pub metadata: BTreeMap<String, String>,
}

fn arg(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn equal_weights<T: Scalar>(dists: Vec<SegmentDistribution<T>>) -> Vec<Segment<T>> {
    let w = T::one() / T::from_usize(dists.len());
    dists.into_iter().map(|d| Segment::new(w, d)).collect()
}

fn join<T: Scalar>(xs: &[T]) -> String {
    xs.iter().map(|&x| display_compact(x)).collect::<Vec<_>>().join(",")
}

/// Solves `(1 − e^{−x})/x = t` for `x > 0`, given `0 < t < 1`.
pub fn solve_exp_ratio<T: Scalar>(t: T) -> Result<T> {
    if !(t > T::zero() && t < T::one()) {
        return Err(arg(format!("exp-ratio level must lie in (0, 1), got {t}")));
    }
    let g = |x: T| -(-x).exp_m1() / x;
    let mut lo = T::zero();
    let mut hi = T::lit(2.0) / t;
    let tol = T::tol(BISECTION_REL_TOL);
    // past the requested tolerance, keep bisecting while g still separates the ends
    for _ in 0..100_000 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid == lo || mid == hi || (hi - lo <= tol * mid && g(hi) == g(lo)) {
            break;
        }
        if g(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Two equally weighted segments with concave profits on `[0, M]` whose
/// uniform-pricing ratio is `(1 + ε + a/(M − a)) / 2`.
///
/// `M = a + ε^{−1/κ}`, with `κ` halved from 1/2 until the kink at `a` keeps
/// segment 2's profit concave. The descending tail of segment 2 has width
/// `w = max(a, M·sqrt(machine ε))` so that `M − w` stays distinguishable
/// from `M`.
pub fn tight_pair<T: Scalar>(a: T, eps: T, kappa: Option<T>) -> Result<Construction<T>> {
    if !(a > T::one() && a.is_finite()) {
        return Err(arg(format!("a must exceed 1, got {a}")));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(arg(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let one = T::one();
    let lambda1 = solve_exp_ratio(one / a)? / a;

    let shape = |kappa: T| {
        let m = a + eps.powf(-one / kappa);
        let w = a.max(m * T::epsilon().sqrt());
        // exact tail width: anchor is representable, so recompute w from it
        let anchor = m - w;
        let w = m - anchor;
        let b = a / (m - a) + eps;
        let d = anchor - a;
        (m, w, anchor, b, d)
    };
    let cond3 = |kappa: T| {
        let (m, _, _, b, d) = shape(kappa);
        if !m.is_finite() || !(d > T::zero()) {
            return None;
        }
        let lhs = (-one / (eps / a + one / (m - a))).exp();
        Some(lhs >= (one - b) / d)
    };

    let kappa = match kappa {
        Some(k) => {
            if !(k > T::zero() && k < one) {
                return Err(arg(format!("kappa must lie in (0, 1), got {k}")));
            }
            k
        }
        None => {
            let mut k = T::lit(KAPPA_START);
            let mut found = None;
            for _ in 0..=KAPPA_HALVINGS {
                match cond3(k) {
                    Some(true) => {
                        found = Some(k);
                        break;
                    }
                    Some(false) => k = k / T::lit(2.0),
                    None => {
                        return Err(Error::Construction {
                            condition: "support-width",
                            detail: format!("M = a + eps^(-1/kappa) is not representable at kappa = {k}"),
                        })
                    }
                }
            }
            found.ok_or_else(|| Error::Construction {
                condition: "kink-concavity-sufficient",
                detail: format!("no kappa on the halving schedule within {KAPPA_HALVINGS} steps"),
            })?
        }
    };

    let (m, w, anchor, _, d) = shape(kappa);
    if !m.is_finite() || !(anchor > a) || !(m > a + a) {
        return Err(Error::Construction {
            condition: "support-width",
            detail: format!("need a finite M > 2a with room for the tail, got M = {m}"),
        });
    }
    let level2 = eps / a + one / (m - a);
    if !(level2 < one) {
        return Err(Error::Construction {
            condition: "continuity",
            detail: format!("eps/a + 1/(M-a) = {level2} >= 1"),
        });
    }
    let lambda2 = solve_exp_ratio(level2)? / a;
    // take the kink levels from the exponential pieces so both sides agree exactly
    let ramp1 = SurvivalPiece::ExpRatio { rate: lambda1 };
    let ramp2 = SurvivalPiece::ExpRatio { rate: lambda2 };
    let level1 = a * ramp1.value(a);
    let b = a * ramp2.value(a);
    let slope2 = (one - b) / d;
    if (-lambda2 * a).exp() < slope2 {
        return Err(Error::Construction {
            condition: "kink-concavity",
            detail: format!("left slope e^(-lambda2 a) below right slope {slope2}"),
        });
    }

    let zero = T::zero();
    let f1 = PiecewiseSurvival::new(
        zero,
        m,
        vec![a],
        vec![ramp1, SurvivalPiece::ProfitLinear { anchor: a, level: level1, slope: -level1 / (m - a) }],
    )?;
    let f2 = PiecewiseSurvival::new(
        zero,
        m,
        vec![a, anchor],
        vec![
            ramp2,
            SurvivalPiece::ProfitLinear { anchor: a, level: b, slope: slope2 },
            SurvivalPiece::ProfitLinear { anchor, level: one, slope: -one / w },
        ],
    )?;
    let half = one / T::lit(2.0);
    let market = MarketInstance::new(
        vec![
            Segment::new(half, SegmentDistribution::piecewise(f1)),
            Segment::new(half, SegmentDistribution::piecewise(f2)),
        ],
        zero,
    )?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::TightPair.name().into());
    md.insert("a".into(), display_compact(a));
    md.insert("epsilon".into(), display_compact(eps));
    md.insert("kappa".into(), display_compact(kappa));
    md.insert("M".into(), display_compact(m));
    md.insert("tail_width".into(), display_compact(w));
    md.insert("lambda1".into(), display_compact(lambda1));
    md.insert("lambda2".into(), display_compact(lambda2));
    md.insert("expected_ratio".into(), display_compact((one + b) / T::lit(2.0)));
    Ok(Construction { market, metadata: md })
}

/// Segment `k` has profit `p` up to `v_k = 1/(K−k+1)`, then falls linearly to
/// zero at `v_k + ε_k`; supports do not overlap at the peaks.
pub fn staircase<T: Scalar>(k: usize) -> Result<Construction<T>> {
    if k < 2 {
        return Err(arg(format!("staircase needs K >= 2, got {k}")));
    }
    let v: Vec<T> = (1..=k).map(|i| T::one() / T::from_usize(k - i + 1)).collect();
    let eps: Vec<T> = (0..k)
        .map(|i| if i + 1 < k { (v[i + 1] - v[i]) / T::lit(2.0) } else { v[i] * T::lit(STAIRCASE_LAST_EPS) })
        .collect();
    let mut dists = Vec::with_capacity(k);
    for i in 0..k {
        let s = PiecewiseSurvival::new(
            T::zero(),
            v[i] + eps[i],
            vec![v[i]],
            vec![
                SurvivalPiece::Affine { intercept: T::one(), slope: T::zero() },
                SurvivalPiece::ProfitLinear { anchor: v[i], level: v[i], slope: -v[i] / eps[i] },
            ],
        )?;
        dists.push(SegmentDistribution::piecewise(s));
    }
    let market = MarketInstance::new(equal_weights(dists), T::zero())?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::Staircase.name().into());
    md.insert("k".into(), k.to_string());
    md.insert("v".into(), join(&v));
    md.insert("eps_k".into(), join(&eps));
    Ok(Construction { market, metadata: md })
}

/// `Triangular(v_k, 1/2)` with `v_k = 1/(K−k+1)` and equal weights.
pub fn triangular_regular<T: Scalar>(k: usize) -> Result<Construction<T>> {
    if k < 2 {
        return Err(arg(format!("triangular family needs K >= 2, got {k}")));
    }
    let half = T::lit(0.5);
    let dists = (1..=k)
        .map(|i| SegmentDistribution::triangular(T::one() / T::from_usize(k - i + 1), half))
        .collect::<Result<Vec<_>>>()?;
    let market = MarketInstance::new(equal_weights(dists), T::zero())?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::TriangularRegular.name().into());
    md.insert("k".into(), k.to_string());
    md.insert("mass".into(), "0.5".into());
    Ok(Construction { market, metadata: md })
}

/// Segment `k` is exponential with rate `K−k+1` truncated to `[0, L]`.
pub fn trunc_exp_mhr<T: Scalar>(k: usize, l_cap: T) -> Result<Construction<T>> {
    if k < 2 {
        return Err(arg(format!("truncated-exponential family needs K >= 2, got {k}")));
    }
    if !(l_cap > T::one() && l_cap.is_finite()) {
        return Err(arg(format!("L must exceed 1, got {l_cap}")));
    }
    let dists = (1..=k)
        .map(|i| SegmentDistribution::truncated_exponential(T::from_usize(k - i + 1), l_cap))
        .collect::<Result<Vec<_>>>()?;
    let market = MarketInstance::new(equal_weights(dists), T::zero())?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::TruncExpMhr.name().into());
    md.insert("k".into(), k.to_string());
    md.insert("l_cap".into(), display_compact(l_cap));
    Ok(Construction { market, metadata: md })
}

/// Point masses at `p_k = (ε/K)((1+ε)/ε)^k` (the last one at
/// `(1/K)((1+ε)/ε)^{K−1}`) with weights `1/(K p_k)`; ratio `(1+ε)/K`.
pub fn dirac_worst_case<T: Scalar>(k: usize, eps: T) -> Result<Construction<T>> {
    if k < 1 {
        return Err(arg("dirac family needs K >= 1".into()));
    }
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(arg(format!("epsilon must be positive, got {eps}")));
    }
    let kk = T::from_usize(k);
    let r = (T::one() + eps) / eps;
    let prices: Vec<T> =
        (1..=k).map(|i| if i < k { eps / kk * r.powi(i as i32) } else { r.powi(k as i32 - 1) / kk }).collect();
    let weights: Vec<T> = prices.iter().map(|&p| T::one() / (kk * p)).collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if (total - T::one()).abs() > T::tol(1e-12) {
        return Err(Error::Construction { condition: "weights-sum", detail: format!("weights sum to {total}") });
    }
    let segments = prices
        .iter()
        .zip(&weights)
        .map(|(&p, &w)| Ok(Segment::new(w, SegmentDistribution::dirac(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let market = MarketInstance::new(segments, T::zero())?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::DiracWorstCase.name().into());
    md.insert("k".into(), k.to_string());
    md.insert("epsilon".into(), display_compact(eps));
    md.insert("atoms".into(), join(&prices));
    md.insert("weights".into(), join(&weights));
    Ok(Construction { market, metadata: md })
}

/// Unbounded supports with profit `h(p) = p − p²/(4p⋆)` up to the peak and
/// constant `3p⋆/4` beyond it.
pub fn unbounded_flat<T: Scalar>(peaks: &[T]) -> Result<Construction<T>> {
    if peaks.is_empty() {
        return Err(arg("unbounded-flat needs at least one peak".into()));
    }
    for (i, &p) in peaks.iter().enumerate() {
        if !(p > T::zero() && p.is_finite()) || (i > 0 && !(p > peaks[i - 1])) {
            return Err(arg("peaks must be positive, finite and strictly increasing".into()));
        }
    }
    let quarter = T::lit(0.25);
    let dists = peaks
        .iter()
        .map(|&p| {
            let s = PiecewiseSurvival::new(
                T::zero(),
                T::infinity(),
                vec![p],
                vec![
                    SurvivalPiece::Affine { intercept: T::one(), slope: -quarter / p },
                    SurvivalPiece::ProfitLinear { anchor: p, level: T::lit(0.75) * p, slope: T::zero() },
                ],
            )?;
            Ok(SegmentDistribution::piecewise(s))
        })
        .collect::<Result<Vec<_>>>()?;
    let market = MarketInstance::new(equal_weights(dists), T::zero())?;
    let mut md = BTreeMap::new();
    md.insert("family".into(), Family::UnboundedFlat.name().into());
    md.insert("k".into(), peaks.len().to_string());
    md.insert("peaks".into(), join(peaks));
    md.insert("ramp".into(), "h(p) = p - p^2/(4 p_k)".into());
    Ok(Construction { market, metadata: md })
}

/// [`unbounded_flat`] with peaks `1, 2, …, K`.
pub fn unbounded_flat_default<T: Scalar>(k: usize) -> Result<Construction<T>> {
    let peaks: Vec<T> = (1..=k).map(T::from_usize).collect();
    unbounded_flat(&peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{analyze, SearchConfig};
    use crate::shape::diagnose_shape;
    use crate::wide::WideFloat;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lambda_for_a_two() {
        // independent oracle: Newton on 1 - e^{-x} = x/2
        let mut x: f64 = 1.5;
        for _ in 0..50 {
            let g = 1.0 - (-x).exp() - x / 2.0;
            let dg = (-x).exp() - 0.5;
            x -= g / dg;
        }
        let l = solve_exp_ratio(0.5f64).unwrap() / 2.0;
        assert_abs_diff_eq!(l, x / 2.0, epsilon = 1e-11);
        assert_abs_diff_eq!(l, 0.796812130020026, epsilon = 1e-11);
    }

    #[test]
    fn tight_pair_f64_moderate_eps() {
        let c = tight_pair(2.0f64, 0.1, None).unwrap();
        let d = diagnose_shape(&c.market, 256).unwrap();
        assert!(d.meets_half_guarantee_hypotheses(), "{d:?}");
        let r = analyze(&c.market, &SearchConfig::default()).unwrap();
        assert!(r.ratio >= 0.5 && r.ratio <= 0.5 + 0.1 * 3.0 / 2.0 + 1e-6, "{}", r.ratio);
        assert_abs_diff_eq!(r.uniform_price, 2.0, epsilon = 1e-9);
        assert!(r.pi_lower_envelope.unwrap() >= 0.5 - 1e-12);
    }

    #[test]
    fn tight_pair_small_eps_needs_wide_float() {
        let e = tight_pair(2.0f64, 1e-3, None).unwrap_err();
        assert!(matches!(e, Error::Construction { condition: "support-width", .. }), "{e}");
        let c = tight_pair(WideFloat::lit(2.0), WideFloat::lit(1e-3), None).unwrap();
        let r = analyze(&c.market, &SearchConfig::default()).unwrap();
        let ratio = r.ratio.to_f64();
        assert!((0.5..=0.5015).contains(&ratio), "{ratio}");
    }

    #[test]
    fn staircase_small() {
        let c = staircase::<f64>(5).unwrap();
        let r = analyze(&c.market, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(r.pi_star, 137.0 / 300.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pi_uniform, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.uniform_price, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ratio, 60.0 / 137.0, epsilon = 1e-12);
        assert!(!diagnose_shape(&c.market, 64).unwrap().common_support);
    }

    #[test]
    fn dirac_small() {
        let c = dirac_worst_case::<f64>(2, 0.1).unwrap();
        let segs = c.market.segments();
        assert_abs_diff_eq!(segs[0].dist.support_hi(), 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(segs[1].dist.support_hi(), 5.5, epsilon = 1e-14);
        assert_abs_diff_eq!(segs[0].weight, 10.0 / 11.0, epsilon = 1e-15);
        let r = analyze(&c.market, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(r.pi_star, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.pi_uniform, 0.55, epsilon = 1e-15);
        let one = dirac_worst_case::<f64>(1, 0.3).unwrap();
        assert_eq!(analyze(&one.market, &SearchConfig::default()).unwrap().ratio, 1.0);
    }

    #[test]
    fn unbounded_flat_has_no_gap() {
        let c = unbounded_flat_default::<f64>(4).unwrap();
        let r = analyze(&c.market, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        assert!(diagnose_shape(&c.market, 64).unwrap().concave_profit.iter().all(|&b| b));
    }

    #[test]
    fn parameter_ranges() {
        assert!(tight_pair(1.0f64, 0.1, None).is_err());
        assert!(tight_pair(2.0f64, 1.0, None).is_err());
        assert!(staircase::<f64>(1).is_err());
        assert!(trunc_exp_mhr(3, 1.0f64).is_err());
        assert!(dirac_worst_case(0, 0.1f64).is_err());
        assert!(unbounded_flat(&[2.0f64, 1.0]).is_err());
        assert!(ConstructionParams::new(Family::Staircase).build::<f64>().is_err());
        assert_eq!("trunc-exp".parse::<Family>().unwrap(), Family::TruncExpMhr);
    }
}
