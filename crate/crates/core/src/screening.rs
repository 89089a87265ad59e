//! Sequential screening restricted to deterministic threshold allocations.
//!
//! The buyer first learns her type `k` (probability `α_k`), then her value
//! `θ ~ F_k`. A threshold contract sells to type `k` iff `θ ≥ τ_k`. With
//! `u_k` the utility of the lowest value of type `k`, the seller earns
//! `Σ α_k τ_k S_k(τ_k) − Σ α_k u_k`, where the smallest admissible `u` solves
//! `u_k ≥ u_j + A_k(j) − A_k(k)`, `u ≥ 0`, and `A_k(j) = ∫_{τ_j}^{θ̄} S_k`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::MarketInstance;
use crate::pricing::{analyze, SearchConfig};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Scalar;

/// Largest number of types searched exhaustively.
pub const EXHAUSTIVE_MAX_K: usize = 3;
const DEFAULT_GRID: usize = 50;
const PANELS_PER_CELL: usize = 64;
const RELAX_SKIP_TOL: f64 = 1e-13;
const MAX_ASCENT_SWEEPS: usize = 100;

/// Interim types over a common support `[0, θ̄]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningInstance<T> {
    market: MarketInstance<T>,
    theta_bar: T,
    grid: usize,
}

impl<T: Scalar> ScreeningInstance<T> {
    pub fn new(market: MarketInstance<T>, grid: usize) -> Result<Self> {
        if grid < 2 {
            return Err(Error::InvalidArgument(format!("screening grid needs at least 2 points, got {grid}")));
        }
        if market.cost() != T::zero() {
            return Err(Error::Precondition("screening assumes zero marginal cost".into()));
        }
        let theta_bar = market
            .common_support_hi()
            .ok_or_else(|| Error::Precondition("screening needs a common bounded support".into()))?;
        Ok(ScreeningInstance { market, theta_bar, grid })
    }

    pub fn with_default_grid(market: MarketInstance<T>) -> Result<Self> {
        Self::new(market, DEFAULT_GRID)
    }

    pub fn market(&self) -> &MarketInstance<T> {
        &self.market
    }

    pub fn theta_bar(&self) -> T {
        self.theta_bar
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// `∫_t^{θ̄} S_k(z) dz`.
    pub fn tail_integral(&self, k: usize, t: T) -> T {
        self.integral_between(k, t, self.theta_bar)
    }

    fn integral_between(&self, k: usize, lo: T, hi: T) -> T {
        let d = &self.market.segments()[k].dist;
        let mut breaks = d.breakpoints();
        breaks.extend(d.atoms());
        let f = |z: T, right: bool| if right { d.survival_open(z) } else { d.survival(z) };
        integrate(f, lo, hi, &breaks, QuadOptions { panels: PANELS_PER_CELL, log_substitution: true })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningReport<T> {
    /// Best single price for everyone; equals `Πᵁ`.
    pub pi_static: T,
    /// Best threshold profile found. A lower bound on the sequential optimum.
    pub pi_seq_threshold: T,
    /// `Π⋆`, an upper bound on the sequential optimum.
    pub pi_star_bound: T,
    pub thresholds: Vec<T>,
    pub base_utilities: Vec<T>,
    /// Whether every profile on the candidate set was enumerated.
    pub exhaustive: bool,
    pub profiles_evaluated: usize,
}

pub fn static_profit<T: Scalar>(s: &ScreeningInstance<T>, cfg: &SearchConfig) -> Result<T> {
    Ok(crate::pricing::optimal_uniform_price(&s.market, cfg)?.1)
}

/// Least nonnegative solution of the rent constraints for matrix `a[k][j] = A_k(j)`,
/// or `None` if the constraints contain a positive cycle.
fn rent_floor<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<T>> {
    let k = a.len();
    let amax = a.iter().flatten().fold(T::one(), |m, x| m.max(x.abs()));
    let skip = T::lit(RELAX_SKIP_TOL) * amax;
    let mut u = vec![T::zero(); k];
    for _round in 0..=k {
        let mut changed = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let cand = u[j] + a[i][j] - a[i][i];
                if cand > u[i] + skip {
                    u[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(u);
        }
    }
    None
}

/// Minimal base utilities for the given thresholds; `Ok(None)` when the
/// profile cannot be implemented.
pub fn interim_rent_floor<T: Scalar>(thresholds: &[T], s: &ScreeningInstance<T>) -> Result<Option<Vec<T>>> {
    let k = s.market.k();
    if thresholds.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: thresholds.len() });
    }
    for &t in thresholds {
        if !(t >= T::zero() && t <= s.theta_bar) {
            return Err(Error::InvalidArgument(format!("threshold {t} outside [0, {}]", s.theta_bar)));
        }
    }
    let a: Vec<Vec<T>> = (0..k).map(|i| thresholds.iter().map(|&t| s.tail_integral(i, t)).collect()).collect();
    Ok(rent_floor(&a))
}

struct Tables<T> {
    cands: Vec<T>,
    /// `tail[k][c] = ∫_{cands[c]}^{θ̄} S_k`
    tail: Vec<Vec<T>>,
    /// `rev[k][c] = α_k · cands[c] · S_k(cands[c])`
    rev: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> Tables<T> {
    fn build(s: &ScreeningInstance<T>, extra: &[T]) -> Self {
        let tb = s.theta_bar;
        let mut cands: Vec<T> = (0..s.grid).map(|i| tb * T::from_usize(i) / T::from_usize(s.grid - 1)).collect();
        cands.extend(extra.iter().copied().filter(|&p| p >= T::zero() && p <= tb));
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        cands.dedup();
        let k = s.market.k();
        let n = cands.len();
        let mut tail = vec![vec![T::zero(); n]; k];
        let mut rev = vec![vec![T::zero(); n]; k];
        for (i, seg) in s.market.segments().iter().enumerate() {
            let mut acc = T::zero();
            for c in (0..n).rev() {
                let hi = if c + 1 < n { cands[c + 1] } else { tb };
                acc = acc + s.integral_between(i, cands[c], hi);
                tail[i][c] = acc;
                rev[i][c] = seg.weight * (cands[c] * seg.dist.survival(cands[c]));
            }
        }
        let weights = s.market.segments().iter().map(|g| g.weight).collect();
        Tables { cands, tail, rev, weights }
    }

    /// Objective and rents of a profile given as candidate indices.
    fn evaluate(&self, idx: &[usize]) -> Option<(T, Vec<T>)> {
        let k = idx.len();
        let a: Vec<Vec<T>> = (0..k).map(|i| idx.iter().map(|&c| self.tail[i][c]).collect()).collect();
        let u = rent_floor(&a)?;
        let gross = (0..k).fold(T::zero(), |acc, i| acc + self.rev[i][idx[i]]);
        let rent = (0..k).fold(T::zero(), |acc, i| acc + self.weights[i] * u[i]);
        Some((gross - rent, u))
    }
}

/// `(value, indices)` ordering: higher value first, then lexicographically smaller profile.
fn better<T: Scalar>(a: &(T, Vec<usize>), b: &(T, Vec<usize>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Best threshold profile over the candidate set `grid ∪ {p_u} ∪ {p_k⋆}`.
///
/// Exhaustive for `K ≤ 3`; otherwise coordinate ascent from the static
/// profile. Either way the static profile is among those examined, so
/// `pi_static ≤ pi_seq_threshold`.
pub fn threshold_seq_optimum<T: Scalar>(s: &ScreeningInstance<T>, cfg: &SearchConfig) -> Result<ScreeningReport<T>> {
    let report = analyze(&s.market, cfg)?;
    let mut extra = report.per_segment_prices.clone();
    extra.push(report.uniform_price);
    let tables = Tables::build(s, &extra);
    let k = s.market.k();
    let n = tables.cands.len();
    let pu = tables.cands.iter().position(|&c| c == report.uniform_price).expect("uniform price is a candidate");

    let static_profile = vec![pu; k];
    let (v0, _) = tables.evaluate(&static_profile).expect("equal thresholds are always feasible");
    let mut best = (v0, static_profile);
    let exhaustive = k <= EXHAUSTIVE_MAX_K;
    let mut evaluated = 1usize;

    if exhaustive {
        let total = n.pow(k as u32);
        let found = (0..total)
            .into_par_iter()
            .filter_map(|mut code| {
                let mut idx = vec![0usize; k];
                for slot in idx.iter_mut().rev() {
                    *slot = code % n;
                    code /= n;
                }
                tables.evaluate(&idx).map(|(v, _)| (v, idx))
            })
            .reduce_with(|a, b| if better(&b, &a) { b } else { a });
        if let Some(f) = found {
            if better(&f, &best) {
                best = f;
            }
        }
        evaluated = total;
    } else {
        for _ in 0..MAX_ASCENT_SWEEPS {
            let mut improved = false;
            for i in 0..k {
                for c in 0..n {
                    let mut idx = best.1.clone();
                    idx[i] = c;
                    evaluated += 1;
                    if let Some((v, _)) = tables.evaluate(&idx) {
                        if v > best.0 {
                            best = (v, idx);
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    let (value, idx) = best;
    let (_, u) = tables.evaluate(&idx).expect("best profile is feasible");
    Ok(ScreeningReport {
        pi_static: report.pi_uniform,
        pi_seq_threshold: value,
        pi_star_bound: report.pi_star,
        thresholds: idx.iter().map(|&c| tables.cands[c]).collect(),
        base_utilities: u,
        exhaustive,
        profiles_evaluated: evaluated,
    })
}
