//! Optimal discriminatory and uniform prices, and the simple-pricing bounds.

use crate::distribution::SegmentDistribution;
use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Scalar;
use crate::search::{golden_max, linspace, Best, TIE_REL_TOL};
use crate::shape::profit_concave_on;

const FLAT_TAIL_TOL: f64 = 1e-9;

/// Search and quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Dense grid size for non-concave profits and for the uniform price.
    pub grid_n: usize,
    /// Relative bracket width at which golden-section search stops.
    pub golden_rel_tol: f64,
    /// Grid used to certify concavity before trusting golden-section search.
    pub shape_grid: usize,
    /// Explicit upper end for the price search on unbounded supports.
    pub cap: Option<f64>,
    /// Total Simpson panels for the random-pricing expectation.
    pub quad_n: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { grid_n: 10_000, golden_rel_tol: 1e-10, shape_grid: 256, cap: None, quad_n: 2048 }
    }
}

fn seg_profit<T: Scalar>(d: &SegmentDistribution<T>, c: T, p: T) -> T {
    (p - c) * d.survival(p)
}

/// Upper end of the price search for one segment.
fn search_hi<T: Scalar>(d: &SegmentDistribution<T>, c: T, cfg: &SearchConfig) -> Result<T> {
    let hi = d.support_hi();
    if hi.is_finite() {
        return Ok(hi);
    }
    if let Some(cap) = cfg.cap {
        return Ok(T::lit(cap).max(c));
    }
    let start = d.flat_profit_tail().ok_or_else(|| Error::Unbounded("segment profit has no flat tail".into()))?;
    let start = start.max(c);
    let cap = start + T::one();
    let (a, b) = (seg_profit(d, c, start), seg_profit(d, c, cap));
    if (a - b).abs() > T::tol(FLAT_TAIL_TOL) * a.abs().max(b.abs()) {
        return Err(Error::Unbounded(format!("profit changes beyond the tail start: {a} vs {b}")));
    }
    Ok(cap)
}

/// Maximizes `f` on `[lo, hi]` given candidate points evaluated exactly.
fn maximize<T: Scalar>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    candidates: &[T],
    concave: bool,
    cfg: &SearchConfig,
) -> Best<T> {
    let mut best = Best::new(lo, f(lo));
    for &p in candidates {
        if p >= lo && p <= hi {
            best.offer(p, f(p));
        }
    }
    if !(hi > lo) {
        return best;
    }
    let tol = T::lit(cfg.golden_rel_tol);
    if concave {
        let g = golden_max(&f, lo, hi, tol);
        best.offer_if_better(g.price, g.value);
        return best;
    }
    let grid = linspace(lo, hi, cfg.grid_n.max(3));
    let mut gbest = Best::new(grid[0], f(grid[0]));
    let mut gi = 0;
    for (i, &p) in grid.iter().enumerate().skip(1) {
        let before = gbest;
        gbest.offer(p, f(p));
        if gbest != before {
            gi = i;
        }
    }
    best.offer_if_better(gbest.price, gbest.value);
    let a = grid[gi.saturating_sub(1)];
    let b = grid[(gi + 1).min(grid.len() - 1)];
    if b > a {
        let g = golden_max(&f, a, b, tol);
        best.offer_if_better(g.price, g.value);
    }
    best
}

/// `(p⋆, π(p⋆))` for one segment; ties go to the lowest price.
pub fn optimal_segment_price<T: Scalar>(dist: &SegmentDistribution<T>, cost: T, cfg: &SearchConfig) -> Result<(T, T)> {
    if cost > dist.support_hi() {
        return Err(Error::InvalidArgument(format!("cost {cost} exceeds the support")));
    }
    let f = |p: T| seg_profit(dist, cost, p);
    if dist.is_atomic() {
        let mut best = Best::new(cost, T::zero());
        for v in dist.atoms() {
            if v >= cost {
                best.offer(v, f(v));
            }
        }
        return Ok((best.price, best.value));
    }
    let hi = search_hi(dist, cost, cfg)?;
    let mut cands = dist.breakpoints();
    cands.extend(dist.atoms());
    cands.push(hi);
    let concave = profit_concave_on(dist, cost, hi, cfg.shape_grid);
    let best = maximize(f, cost, hi, &cands, concave, cfg);
    Ok((best.price, best.value))
}

fn uniform_search<T: Scalar>(m: &MarketInstance<T>, seg_prices: &[T], cfg: &SearchConfig) -> Result<(T, T)> {
    let c = m.cost();
    let f = |p: T| m.uniform_profit_unchecked(p);
    let mut cands: Vec<T> = seg_prices.to_vec();
    for s in m.segments() {
        cands.extend(s.dist.breakpoints());
        cands.extend(s.dist.atoms());
    }
    if m.is_atomic() {
        let mut best = Best::new(c, T::zero());
        for &p in &cands {
            if p >= c {
                best.offer(p, f(p));
            }
        }
        return Ok((best.price, best.value));
    }
    let mut hi = m.support_hi();
    if !hi.is_finite() {
        let top = seg_prices.iter().copied().fold(c, T::max);
        hi = match cfg.cap {
            Some(cap) => T::lit(cap).max(top),
            None => {
                let cap = top + T::one();
                let (a, b) = (f(top), f(cap));
                if (a - b).abs() > T::tol(FLAT_TAIL_TOL) * a.abs().max(b.abs()) {
                    return Err(Error::Unbounded(format!("uniform profit changes beyond {top}: {a} vs {b}")));
                }
                cap
            }
        };
    }
    cands.push(hi);
    cands.push((c + hi) / T::lit(2.0));
    let best = maximize(f, c, hi, &cands, false, cfg);
    Ok((best.price, best.value))
}

/// `(p_u, Πᵁ)`: the best single price for the whole market.
pub fn optimal_uniform_price<T: Scalar>(m: &MarketInstance<T>, cfg: &SearchConfig) -> Result<(T, T)> {
    let mut prices = Vec::with_capacity(m.k());
    for s in m.segments() {
        prices.push(optimal_segment_price(&s.dist, m.cost(), cfg)?.0);
    }
    uniform_search(m, &prices, cfg)
}

/// `(p_s, Πᵁ(p_s))` with `p_s = (c + θ̄)/2`.
pub fn midpoint_price_profit<T: Scalar>(m: &MarketInstance<T>, theta_bar: T) -> Result<(T, T)> {
    require_common(m, theta_bar)?;
    let p = (m.cost() + theta_bar) / T::lit(2.0);
    Ok((p, m.uniform_profit_unchecked(p)))
}

fn require_common<T: Scalar>(m: &MarketInstance<T>, theta_bar: T) -> Result<()> {
    match m.common_support_hi() {
        Some(h) if h == theta_bar => Ok(()),
        Some(h) => Err(Error::Precondition(format!("common upper support end is {h}, not {theta_bar}"))),
        None => Err(Error::Precondition("segments do not share a bounded upper support end".into())),
    }
}

/// Sum of triangles through `(c, 0)`, `(p_k⋆, r_k)` and `(θ̄, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerEnvelope<T> {
    cost: T,
    theta_bar: T,
    vertices: Vec<(T, T)>,
}

impl<T: Scalar> LowerEnvelope<T> {
    /// `vertices` are `(p_k⋆, r_k)` pairs with `c ≤ p_k⋆ ≤ θ̄`.
    pub fn new(cost: T, theta_bar: T, vertices: Vec<(T, T)>) -> Result<Self> {
        if !(theta_bar > cost) {
            return Err(Error::InvalidArgument(format!("support end {theta_bar} must exceed cost {cost}")));
        }
        for &(p, _) in &vertices {
            if p < cost || p > theta_bar {
                return Err(Error::InvalidArgument(format!("vertex {p} outside [{cost}, {theta_bar}]")));
            }
        }
        Ok(LowerEnvelope { cost, theta_bar, vertices })
    }

    fn triangle(&self, p: T, peak: T, r: T) -> T {
        let (c, t) = (self.cost, self.theta_bar);
        if p < c || p > t {
            return T::zero();
        }
        if p == peak {
            r
        } else if p < peak {
            r * (p - c) / (peak - c)
        } else {
            r * (t - p) / (t - peak)
        }
    }

    /// `Σ_k L_k(p)`.
    pub fn value_at(&self, p: T) -> T {
        self.vertices.iter().fold(T::zero(), |acc, &(peak, r)| acc + self.triangle(p, peak, r))
    }

    /// `Πᴸ = max_{p ∈ {p_k⋆}} Σ_k L_k(p)` and its argmax.
    pub fn maximum(&self) -> (T, T) {
        let mut best = Best::new(self.cost, self.value_at(self.cost));
        for &(p, _) in &self.vertices {
            best.offer(p, self.value_at(p));
        }
        (best.price, best.value)
    }
}

/// `Πᴸ` for a common-support market.
pub fn lower_envelope_profit<T: Scalar>(m: &MarketInstance<T>, theta_bar: T, cfg: &SearchConfig) -> Result<T> {
    require_common(m, theta_bar)?;
    let mut v = Vec::with_capacity(m.k());
    for s in m.segments() {
        let (p, pi) = optimal_segment_price(&s.dist, m.cost(), cfg)?;
        v.push((p, s.weight * pi));
    }
    Ok(LowerEnvelope::new(m.cost(), theta_bar, v)?.maximum().1)
}

/// `E[Πᵁ(p)]` for `p ~ U[c, θ̄]`, by Simpson split at every kink and atom.
pub fn random_pricing_expectation<T: Scalar>(m: &MarketInstance<T>, theta_bar: T, quad_n: usize) -> Result<T> {
    if quad_n < 2 {
        return Err(Error::InvalidArgument(format!("quad_n must be at least 2, got {quad_n}")));
    }
    require_common(m, theta_bar)?;
    let c = m.cost();
    if !(theta_bar > c) {
        return Ok(T::zero());
    }
    let mut breaks = Vec::new();
    for s in m.segments() {
        breaks.extend(s.dist.breakpoints());
        breaks.extend(s.dist.atoms());
    }
    let f = |p: T, right_limit: bool| {
        let margin = p - c;
        m.segments().iter().fold(T::zero(), |acc, s| {
            let surv = if right_limit { s.dist.survival_open(p) } else { s.dist.survival(p) };
            acc + s.weight * (margin * surv)
        })
    };
    let total = integrate(f, c, theta_bar, &breaks, QuadOptions { panels: quad_n, log_substitution: false });
    Ok(total / (theta_bar - c))
}

/// Everything [`analyze`] computes for one market.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingReport<T> {
    pub per_segment_prices: Vec<T>,
    /// `r_k = α_k π_k(p_k⋆)`.
    pub per_segment_profits: Vec<T>,
    pub pi_star: T,
    pub pi_uniform: T,
    pub uniform_price: T,
    /// `max_{p ∈ {p_k⋆}} Πᵁ(p)`; never above `pi_uniform`.
    pub pi_candidates: T,
    pub theta_bar: Option<T>,
    pub midpoint_price: Option<T>,
    pub pi_midpoint: Option<T>,
    pub pi_lower_envelope: Option<T>,
    pub pi_random_expect: Option<T>,
    /// `Πᵁ / Π⋆`, or 1 when `Π⋆ = 0`.
    pub ratio: T,
}

/// Full pricing report. Quantities that need a common bounded support are
/// `None` when it is missing.
pub fn analyze<T: Scalar>(m: &MarketInstance<T>, cfg: &SearchConfig) -> Result<PricingReport<T>> {
    let c = m.cost();
    let mut prices = Vec::with_capacity(m.k());
    let mut values = Vec::with_capacity(m.k());
    for s in m.segments() {
        let (p, v) = optimal_segment_price(&s.dist, c, cfg)?;
        prices.push(p);
        values.push(v);
    }
    let (p_u, pi_u) = uniform_search(m, &prices, cfg)?;

    // p_u is a valid per-segment price too; keep whichever is better
    let tie = T::lit(TIE_REL_TOL);
    for (k, s) in m.segments().iter().enumerate() {
        let at_u = seg_profit(&s.dist, c, p_u);
        if at_u > values[k] && (at_u - values[k]) > tie * at_u.abs() {
            prices[k] = p_u;
            values[k] = at_u;
        }
    }
    let r: Vec<T> = m.segments().iter().zip(&prices).map(|(s, &p)| s.weight * ((p - c) * s.dist.survival(p))).collect();
    let pi_star = r.iter().fold(T::zero(), |a, &b| a + b);

    let mut cand = Best::new(prices[0], m.uniform_profit_unchecked(prices[0]));
    for &p in &prices[1..] {
        cand.offer(p, m.uniform_profit_unchecked(p));
    }

    let theta_bar = m.common_support_hi();
    let (mut midpoint_price, mut pi_midpoint, mut pi_lower, mut pi_rand) = (None, None, None, None);
    if let Some(t) = theta_bar {
        if t > c {
            let (ps, pis) = midpoint_price_profit(m, t)?;
            midpoint_price = Some(ps);
            pi_midpoint = Some(pis);
            let env = LowerEnvelope::new(c, t, prices.iter().copied().zip(r.iter().copied()).collect())?;
            pi_lower = Some(env.maximum().1);
            pi_rand = Some(random_pricing_expectation(m, t, cfg.quad_n)?);
        }
    }
    let ratio = if pi_star > T::zero() { pi_u / pi_star } else { T::one() };
    Ok(PricingReport {
        per_segment_prices: prices,
        per_segment_profits: r,
        pi_star,
        pi_uniform: pi_u,
        uniform_price: p_u,
        pi_candidates: cand.value,
        theta_bar,
        midpoint_price,
        pi_midpoint,
        pi_lower_envelope: pi_lower,
        pi_random_expect: pi_rand,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Segment;
    use approx::assert_abs_diff_eq;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    fn uniform01() -> SegmentDistribution<f64> {
        SegmentDistribution::uniform(0.0, 1.0).unwrap()
    }

    fn single(d: SegmentDistribution<f64>) -> MarketInstance<f64> {
        MarketInstance::new(vec![Segment::new(1.0, d)], 0.0).unwrap()
    }

    #[test]
    fn segment_optimum_examples() {
        let (p, v) = optimal_segment_price(&uniform01(), 0.0, &cfg()).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);

        let t = SegmentDistribution::triangular(1.0, 0.5).unwrap();
        assert_eq!(optimal_segment_price(&t, 0.0, &cfg()).unwrap(), (1.0, 0.5));
    }

    #[test]
    fn truncated_exponential_first_order_condition() {
        // fixed point of p = (1 - e^{-5(L-p)})/5 by iteration
        let mut p: f64 = 0.1;
        for _ in 0..100 {
            p = -(-5.0 * (10.0 - p)).exp_m1() / 5.0;
        }
        let d = SegmentDistribution::truncated_exponential(5.0, 10.0).unwrap();
        let (q, _) = optimal_segment_price(&d, 0.0, &cfg()).unwrap();
        assert_abs_diff_eq!(q, p, epsilon = 1e-7);
        assert_abs_diff_eq!(p, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn midpoint_examples() {
        let m = single(uniform01());
        assert_eq!(midpoint_price_profit(&m, 1.0).unwrap(), (0.5, 0.25));
        let m = MarketInstance::new(vec![Segment::new(1.0, SegmentDistribution::uniform(0.0, 10.0).unwrap())], 2.0)
            .unwrap();
        assert_eq!(midpoint_price_profit(&m, 10.0).unwrap().0, 6.0);
        let two = MarketInstance::new(
            vec![Segment::new(0.5, uniform01()), Segment::new(0.5, SegmentDistribution::uniform(0.0, 2.0).unwrap())],
            0.0,
        )
        .unwrap();
        assert!(matches!(midpoint_price_profit(&two, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn envelope_examples() {
        let env = LowerEnvelope::new(0.0, 1.0, vec![(0.5, 1.0)]).unwrap();
        assert_eq!(env.maximum(), (0.5, 1.0));
        assert_eq!(env.value_at(0.25), 0.5);
        let flat_left = LowerEnvelope::new(0.0, 1.0, vec![(0.0, 1.0)]).unwrap();
        assert_eq!(flat_left.value_at(0.5), 0.5);
        let flat_right = LowerEnvelope::new(0.0, 1.0, vec![(1.0, 1.0)]).unwrap();
        assert_eq!(flat_right.value_at(0.5), 0.5);
    }

    #[test]
    fn random_pricing_examples() {
        let m = single(uniform01());
        let e = random_pricing_expectation(&m, 1.0, 2048).unwrap();
        assert_abs_diff_eq!(e, 1.0 / 6.0, epsilon = 1e-12);
        let two =
            MarketInstance::new(vec![Segment::new(0.5, uniform01()), Segment::new(0.5, uniform01())], 0.0).unwrap();
        assert_abs_diff_eq!(random_pricing_expectation(&two, 1.0, 2048).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        assert!(matches!(random_pricing_expectation(&m, 1.0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn atom_expectation_uses_one_sided_limits() {
        let d = SegmentDistribution::discrete([(0.5, 0.5), (1.0, 0.5)]).unwrap();
        let m = single(d);
        let e = random_pricing_expectation(&m, 1.0, 64).unwrap();
        // ∫_0^{1/2} p dp + ∫_{1/2}^1 p/2 dp = 1/8 + 3/16
        assert_abs_diff_eq!(e, 1.0 / 8.0 + 3.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn unbounded_without_flat_tail_is_rejected() {
        use crate::distribution::{PiecewiseSurvival, SurvivalPiece};
        let s = PiecewiseSurvival::new(
            0.0,
            f64::INFINITY,
            vec![1.0],
            vec![
                SurvivalPiece::Affine { intercept: 1.0, slope: -0.5 },
                SurvivalPiece::ProfitLinear { anchor: 1.0, level: 0.5, slope: -0.01 },
            ],
        )
        .unwrap();
        let d = SegmentDistribution::piecewise(s);
        assert!(matches!(optimal_segment_price(&d, 0.0, &cfg()), Err(Error::Unbounded(_))));
        let capped = SearchConfig { cap: Some(10.0), ..cfg() };
        assert!(optimal_segment_price(&d, 0.0, &capped).is_ok());
    }

    #[test]
    fn identical_halves() {
        let m = MarketInstance::new(vec![Segment::new(0.5, uniform01()), Segment::new(0.5, uniform01())], 0.0).unwrap();
        let (p, v) = optimal_uniform_price(&m, &cfg()).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        let r = analyze(&m, &cfg()).unwrap();
        assert_eq!(r.ratio, 1.0);
    }
}
