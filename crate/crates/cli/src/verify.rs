//! Property suite over random concave common-support markets.

use pricegap::{analyze, diagnose_shape, Market, PricingReport, Scalar, SearchConfig, WideFloat};
use rayon::prelude::*;
use serde::Serialize;

use crate::sample;
use crate::spec::{ExplicitMarket, InstanceSpec};
use crate::CliError;

pub const HALF_TOL: f64 = 1e-9;
pub const QUAD_TOL: f64 = 1e-6;
pub const ORDER_TOL: f64 = 1e-9;
pub const PINNED_EPS: f64 = 1e-3;
pub const PINNED_A: f64 = 2.0;
pub const SHAPE_GRID: usize = 256;
const MAX_RESAMPLES: usize = 100;

/// Every property that must hold on a market with concave profits and a
/// common bounded support. Returns the violated ones.
pub fn half_guarantee_violations<T: Scalar>(r: &PricingReport<T>) -> Vec<String> {
    let f = |x: T| x.to_f64_lossy();
    let (star, uni) = (f(r.pi_star), f(r.pi_uniform));
    let k = r.per_segment_prices.len();
    let mut bad = universal_violations(r);
    if f(r.ratio) < 0.5 - HALF_TOL {
        bad.push(format!("ratio {} below 1/2", f(r.ratio)));
    }
    match (r.pi_midpoint.map(f), r.pi_lower_envelope.map(f), r.pi_random_expect.map(f)) {
        (Some(mid), Some(env), Some(rnd)) => {
            if mid < 0.5 * star - HALF_TOL {
                bad.push(format!("midpoint profit {mid} below half of {star}"));
            }
            if rnd < 0.5 * star - QUAD_TOL {
                bad.push(format!("random-price expectation {rnd} below half of {star}"));
            }
            if mid > uni + ORDER_TOL {
                bad.push(format!("midpoint profit {mid} above uniform optimum {uni}"));
            }
            if env > uni + ORDER_TOL {
                bad.push(format!("lower envelope {env} above uniform optimum {uni}"));
            }
        }
        _ => bad.push(format!("common-support fields missing (K={k})")),
    }
    bad
}

/// Properties that hold on every market.
pub fn universal_violations<T: Scalar>(r: &PricingReport<T>) -> Vec<String> {
    let f = |x: T| x.to_f64_lossy();
    let (star, uni, cand, ratio) = (f(r.pi_star), f(r.pi_uniform), f(r.pi_candidates), f(r.ratio));
    let k = r.per_segment_prices.len();
    let mut bad = Vec::new();
    if uni > star + ORDER_TOL {
        bad.push(format!("uniform optimum {uni} above discriminatory optimum {star}"));
    }
    if cand > uni + ORDER_TOL {
        bad.push(format!("candidate profit {cand} above uniform optimum {uni}"));
    }
    if ratio < 1.0 / k as f64 - ORDER_TOL {
        bad.push(format!("ratio {ratio} below 1/K = {}", 1.0 / k as f64));
    }
    bad
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub instances: usize,
    pub resampled: usize,
    pub min_ratio: f64,
    pub min_midpoint_share: f64,
    pub min_random_share: f64,
    pub pinned_ratio: f64,
    pub pinned_bound: f64,
}

pub struct Failure {
    pub index: usize,
    pub spec: InstanceSpec,
    pub problems: Vec<String>,
}

/// The `index`-th instance of the suite for `seed`, certified concave.
/// Instance `i` draws from its own stream so the suite parallelizes without
/// changing which instances it contains.
pub fn suite_instance(seed: u64, index: usize, zero_cost: bool) -> Result<(ExplicitMarket, Market, usize), CliError> {
    let mut rng = sample::rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64);
    for resampled in 0..MAX_RESAMPLES {
        let e = sample::concave_common_support(&mut rng, zero_cost);
        let m = e.to_market()?;
        if diagnose_shape(&m, SHAPE_GRID)?.meets_half_guarantee_hypotheses() {
            return Ok((e, m, resampled));
        }
    }
    Err(CliError::Invariant(format!("instance {index}: no concave sample in {MAX_RESAMPLES} draws")))
}

/// Ratio of the tight pair at `ε = 10⁻³`, `a = 2`, and its upper bound.
pub fn pinned_tight_pair() -> Result<(f64, f64), CliError> {
    let c = pricegap::constructions::tight_pair(WideFloat::lit(PINNED_A), WideFloat::lit(PINNED_EPS), None)?;
    let r = analyze(&c.market, &SearchConfig::default())?;
    Ok((r.ratio.to_f64(), 0.5 + PINNED_EPS * (PINNED_A + 1.0) / 2.0))
}

pub fn run(seed: u64, n: usize) -> Result<Result<VerifySummary, Failure>, CliError> {
    if n == 0 {
        return Err(CliError::Usage("verify needs at least one instance".into()));
    }
    let cfg = SearchConfig::default();
    let results: Vec<_> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let (e, m, resampled) = suite_instance(seed, i, false)?;
            let r = analyze(&m, &cfg)?;
            let problems = half_guarantee_violations(&r);
            Ok((e, r, resampled, problems))
        })
        .collect::<Result<_, _>>()?;
    let mut summary = VerifySummary {
        seed,
        instances: n,
        resampled: 0,
        min_ratio: f64::INFINITY,
        min_midpoint_share: f64::INFINITY,
        min_random_share: f64::INFINITY,
        pinned_ratio: f64::NAN,
        pinned_bound: f64::NAN,
    };
    for (index, (e, r, resampled, problems)) in results.into_iter().enumerate() {
        if !problems.is_empty() {
            return Ok(Err(Failure { index, spec: InstanceSpec::explicit(e), problems }));
        }
        summary.resampled += resampled;
        summary.min_ratio = summary.min_ratio.min(r.ratio);
        if r.pi_star > 0.0 {
            summary.min_midpoint_share = summary.min_midpoint_share.min(r.pi_midpoint.unwrap_or(0.0) / r.pi_star);
            summary.min_random_share = summary.min_random_share.min(r.pi_random_expect.unwrap_or(0.0) / r.pi_star);
        }
    }
    let (ratio, bound) = pinned_tight_pair()?;
    summary.pinned_ratio = ratio;
    summary.pinned_bound = bound;
    if !(0.5..=bound).contains(&ratio) {
        let spec = InstanceSpec::construction(
            crate::spec::ConstructionSpec {
                family: "tight-pair".into(),
                a: Some(PINNED_A),
                epsilon: Some(PINNED_EPS),
                ..Default::default()
            },
            Default::default(),
        );
        return Ok(Err(Failure {
            index: n,
            spec,
            problems: vec![format!("pinned tight pair ratio {ratio} outside [0.5, {bound}]")],
        }));
    }
    Ok(Ok(summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = run(5, 40).unwrap().ok().expect("suite passes");
        let b = run(5, 40).unwrap().ok().expect("suite passes");
        assert_eq!(a, b);
        assert!(a.min_ratio >= 0.5 - HALF_TOL);
        assert!((0.5..=0.5015).contains(&a.pinned_ratio));
    }

    #[test]
    fn zero_instances_is_an_argument_error() {
        assert!(matches!(run(1, 0), Err(CliError::Usage(_))));
    }

    #[test]
    fn violation_detector_fires() {
        let m = pricegap::constructions::staircase::<f64>(5).unwrap().market;
        let r = analyze(&m, &SearchConfig::default()).unwrap();
        let bad = half_guarantee_violations(&r);
        assert!(bad.iter().any(|s| s.contains("below 1/2")));
        assert!(universal_violations(&r).is_empty());
    }
}
