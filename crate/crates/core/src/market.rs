//! Segments, markets and profit functions.

use crate::distribution::SegmentDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const WEIGHT_TOL: f64 = 1e-12;

/// A consumer subpopulation with weight `α_k` and value distribution `F_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub weight: T,
    pub dist: SegmentDistribution<T>,
}

impl<T> Segment<T> {
    pub fn new(weight: T, dist: SegmentDistribution<T>) -> Self {
        Segment { weight, dist }
    }
}

/// Weighted segments sharing one marginal cost.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance<T> {
    segments: Vec<Segment<T>>,
    cost: T,
}

impl<T: Scalar> MarketInstance<T> {
    pub fn new(segments: Vec<Segment<T>>, cost: T) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidMarket("a market needs at least one segment".into()));
        }
        if !(cost.is_finite() && cost >= T::zero()) {
            return Err(Error::InvalidMarket(format!("cost must be finite and nonnegative, got {cost}")));
        }
        let mut total = T::zero();
        for (k, s) in segments.iter().enumerate() {
            if !(s.weight.is_finite() && s.weight >= T::zero()) {
                return Err(Error::InvalidMarket(format!("segment {k} has weight {}", s.weight)));
            }
            if cost > s.dist.support_hi() {
                return Err(Error::InvalidMarket(format!(
                    "cost {cost} exceeds the upper support end {} of segment {k}",
                    s.dist.support_hi()
                )));
            }
            total = total + s.weight;
        }
        if (total - T::one()).abs() > T::tol(WEIGHT_TOL) {
            return Err(Error::InvalidMarket(format!("weights sum to {total}, expected 1")));
        }
        Ok(MarketInstance { segments, cost })
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn cost(&self) -> T {
        self.cost
    }

    pub fn k(&self) -> usize {
        self.segments.len()
    }

    /// `max_k sup Θ_k`; may be `+∞`.
    pub fn support_hi(&self) -> T {
        self.segments.iter().map(|s| s.dist.support_hi()).fold(T::neg_infinity(), T::max)
    }

    /// The shared finite upper support end `θ̄`, if every segment has the same one.
    pub fn common_support_hi(&self) -> Option<T> {
        let hi = self.segments[0].dist.support_hi();
        if hi.is_finite() && self.segments.iter().all(|s| s.dist.support_hi() == hi) {
            Some(hi)
        } else {
            None
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.segments.iter().all(|s| s.dist.is_atomic())
    }

    /// `Σ_k α_k π_k(p)`, the profit of charging `p` to everyone.
    pub fn uniform_profit(&self, p: T) -> Result<T> {
        check_cost(self.cost, p)?;
        Ok(self.uniform_profit_unchecked(p))
    }

    pub(crate) fn uniform_profit_unchecked(&self, p: T) -> T {
        let margin = p - self.cost;
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.weight * (margin * s.dist.survival(p)))
    }
}

fn check_cost<T: Scalar>(cost: T, p: T) -> Result<()> {
    if p < cost || p.is_nan() {
        Err(Error::BelowCost { price: p.to_f64_lossy(), cost: cost.to_f64_lossy() })
    } else {
        Ok(())
    }
}

/// `π(p) = (p − c) · Pr[θ ≥ p]`.
pub fn segment_profit<T: Scalar>(dist: &SegmentDistribution<T>, cost: T, p: T) -> Result<T> {
    check_cost(cost, p)?;
    Ok((p - cost) * dist.survival(p))
}

/// `Π(p) = Σ_k α_k π_k(p_k)`.
pub fn market_profit<T: Scalar>(m: &MarketInstance<T>, prices: &[T]) -> Result<T> {
    if prices.len() != m.k() {
        return Err(Error::LengthMismatch { expected: m.k(), got: prices.len() });
    }
    let mut total = T::zero();
    for (s, &p) in m.segments.iter().zip(prices) {
        total = total + s.weight * segment_profit(&s.dist, m.cost, p)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn halves() -> MarketInstance<f64> {
        let u = SegmentDistribution::uniform(0.0, 1.0).unwrap();
        MarketInstance::new(vec![Segment::new(0.5, u.clone()), Segment::new(0.5, u)], 0.0).unwrap()
    }

    #[test]
    fn segment_profit_examples() {
        let u = SegmentDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(segment_profit(&u, 0.0, 0.5).unwrap(), 0.25);
        let d = SegmentDistribution::dirac(0.55).unwrap();
        assert_eq!(segment_profit(&d, 0.0, 0.55).unwrap(), 0.55);
        let t = SegmentDistribution::triangular(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(segment_profit(&t, 0.0, 0.5).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(segment_profit(&u, 0.2, 0.1), Err(Error::BelowCost { .. })));
    }

    #[test]
    fn market_profit_examples() {
        let m = halves();
        assert_eq!(market_profit(&m, &[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(market_profit(&m, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(market_profit(&m, &[0.5]), Err(Error::LengthMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn validation() {
        let u = SegmentDistribution::uniform(0.0, 1.0).unwrap();
        assert!(MarketInstance::new(vec![Segment::new(0.7, u.clone())], 0.0).is_err());
        assert!(MarketInstance::new(vec![Segment::new(1.0, u.clone())], 1.5).is_err());
        assert!(MarketInstance::new(vec![Segment::new(1.0, u.clone())], -0.1).is_err());
        assert!(MarketInstance::<f64>::new(vec![], 0.0).is_err());
        assert!(MarketInstance::new(vec![Segment::new(1.0 + 1e-13, u)], 1.0).is_ok());
    }

    #[test]
    fn common_support() {
        assert_eq!(halves().common_support_hi(), Some(1.0));
        let m = MarketInstance::new(
            vec![
                Segment::new(0.5, SegmentDistribution::uniform(0.0, 1.0).unwrap()),
                Segment::new(0.5, SegmentDistribution::uniform(0.0, 2.0).unwrap()),
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(m.common_support_hi(), None);
        assert_eq!(m.support_hi(), 2.0);
    }

    proptest! {
        #[test]
        fn profit_nonnegative_on_support(lo in 0.0f64..5.0, w in 0.01f64..5.0, c_frac in 0.0f64..1.0, t in 0.0f64..1.0) {
            let hi = lo + w;
            let c = c_frac * hi;
            let p = c + t * (hi - c);
            for d in [
                SegmentDistribution::uniform(lo, hi).unwrap(),
                SegmentDistribution::truncated_exponential(1.0 + lo, hi).unwrap(),
                SegmentDistribution::triangular(hi, 0.1 + 0.9 * c_frac).unwrap(),
            ] {
                prop_assert!(segment_profit(&d, c, p).unwrap() >= 0.0);
            }
        }
    }
}
