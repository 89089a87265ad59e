//! Seeded random instances for the property suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::spec::{DistSpec, ExplicitMarket, PieceSpec, SegmentSpec};

pub const MAX_K: usize = 16;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn affine(intercept: f64, slope: f64) -> PieceSpec {
    PieceSpec { template: "affine".into(), params: vec![intercept, slope] }
}

/// Survival linear between consecutive knots `(x_i, s_i)`, starting at `(0, 1)`
/// and ending at `(theta_bar, 0)`.
fn polyline(knots: &[(f64, f64)]) -> DistSpec {
    let theta_bar = knots[knots.len() - 1].0;
    let pieces = knots
        .windows(2)
        .map(|w| {
            let ((x0, s0), (x1, s1)) = (w[0], w[1]);
            let slope = (s1 - s0) / (x1 - x0);
            affine(s0 - slope * x0, slope)
        })
        .collect();
    let breakpoints = knots[1..knots.len() - 1].iter().map(|k| k.0).collect();
    DistSpec::Piecewise { lo: 0.0, hi: Some(theta_bar), breakpoints, pieces }
}

/// Mixture of `Uniform(l_j, θ̄)`; its survival is concave and piecewise linear.
fn uniform_mixture(rng: &mut impl Rng, theta_bar: f64) -> DistSpec {
    let m = rng.gen_range(1..=4);
    let mut comps: Vec<(f64, f64)> =
        weights(rng, m).into_iter().map(|w| (rng.gen_range(0.0..0.9) * theta_bar, w)).collect();
    comps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let survival =
        |p: f64| -> f64 { comps.iter().map(|&(l, w)| w * ((theta_bar - p) / (theta_bar - l)).min(1.0)).sum() };
    let mut knots = vec![(0.0, 1.0)];
    for &(l, _) in &comps {
        if l > knots[knots.len() - 1].0 {
            knots.push((l, survival(l)));
        }
    }
    knots.push((theta_bar, 0.0));
    polyline(&knots)
}

/// Concave decreasing survival: drop rates increase from piece to piece.
fn concave_ramp(rng: &mut impl Rng, theta_bar: f64) -> DistSpec {
    let n = rng.gen_range(1..=4);
    let mut xs: Vec<f64> = (1..n).map(|_| rng.gen_range(0.05..0.95) * theta_bar).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut edges = vec![0.0];
    edges.extend(xs);
    edges.push(theta_bar);
    let mut rates: Vec<f64> = (1..edges.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    rates.sort_by(f64::total_cmp);
    if let Some(last) = rates.last_mut().filter(|r| **r == 0.0) {
        *last = 1.0;
    }
    let drop: f64 = edges.windows(2).zip(&rates).map(|(e, r)| r * (e[1] - e[0])).sum();
    let mut knots = vec![(0.0, 1.0)];
    let mut s = 1.0;
    for (i, e) in edges.windows(2).enumerate() {
        s -= rates[i] / drop * (e[1] - e[0]);
        knots.push((e[1], if i + 2 == edges.len() { 0.0 } else { s.max(0.0) }));
    }
    polyline(&knots)
}

/// A random market whose segments share the support `[0, θ̄]` and have concave
/// profit on `[c, θ̄]`. `zero_cost` forces `c = 0`.
pub fn concave_common_support(rng: &mut impl Rng, zero_cost: bool) -> ExplicitMarket {
    let k = rng.gen_range(1..=MAX_K);
    let theta_bar = rng.gen_range(0.5..4.0);
    let cost = if zero_cost || rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..0.6) * theta_bar };
    let segments = weights(rng, k)
        .into_iter()
        .map(|weight| {
            let dist = match rng.gen_range(0..3) {
                0 => DistSpec::Uniform { lo: rng.gen_range(0.0..0.9) * theta_bar, hi: theta_bar },
                1 => uniform_mixture(rng, theta_bar),
                _ => concave_ramp(rng, theta_bar),
            };
            SegmentSpec { weight, dist }
        })
        .collect();
    ExplicitMarket { cost, segments }
}

/// Small atomic market on a dyadic lattice, so every profit is exact in f64.
/// Values are multiples of 1/16 in `(0, 4]`, probabilities multiples of 1/8,
/// weights multiples of 1/8.
pub fn dyadic_atomic(rng: &mut impl Rng) -> ExplicitMarket {
    let k = rng.gen_range(1..=3);
    let weights = dyadic_simplex(rng, k, 8);
    let segments: Vec<SegmentSpec> = weights
        .into_iter()
        .map(|weight| {
            let n = rng.gen_range(1..=5);
            let mut values: Vec<u32> = (1..=64).collect();
            values.shuffle(rng);
            values[..n].sort_unstable();
            let probs = dyadic_simplex(rng, n, 8);
            let atoms = values[..n].iter().zip(probs).map(|(&v, p)| [v as f64 / 16.0, p]).collect();
            SegmentSpec { weight, dist: DistSpec::Discrete { atoms } }
        })
        .collect();
    let top = segments
        .iter()
        .map(|s: &SegmentSpec| match &s.dist {
            DistSpec::Discrete { atoms } => atoms.iter().map(|a| a[0]).fold(0.0, f64::max),
            _ => unreachable!("only discrete segments are generated"),
        })
        .fold(f64::INFINITY, f64::min);
    let cost = rng.gen_range(0..=(top * 16.0) as u32) as f64 / 16.0;
    ExplicitMarket { cost, segments }
}

/// `n` positive multiples of `1/den` summing to one (`n <= den`).
fn dyadic_simplex(rng: &mut impl Rng, n: usize, den: u32) -> Vec<f64> {
    let mut units = vec![1u32; n];
    for _ in n as u32..den {
        units[rng.gen_range(0..n)] += 1;
    }
    units.into_iter().map(|u| u as f64 / den as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pricegap::diagnose_shape;

    #[test]
    fn concave_instances_pass_their_own_certificate() {
        let mut r = rng(7);
        for _ in 0..200 {
            let e = concave_common_support(&mut r, false);
            let m = e.to_market().unwrap();
            let d = diagnose_shape(&m, 256).unwrap();
            assert!(d.meets_half_guarantee_hypotheses(), "{e:?}\n{d:?}");
        }
    }

    #[test]
    fn same_seed_same_instances() {
        let a: Vec<_> = (0..5)
            .map({
                let mut r = rng(3);
                move |_| concave_common_support(&mut r, false)
            })
            .collect();
        let mut r = rng(3);
        for e in a {
            assert_eq!(e, concave_common_support(&mut r, false));
        }
    }

    #[test]
    fn dyadic_instances_are_valid() {
        let mut r = rng(11);
        for _ in 0..100 {
            let e = dyadic_atomic(&mut r);
            let m = e.to_market().unwrap();
            assert!(m.is_atomic() && m.k() <= 3);
        }
    }
}
