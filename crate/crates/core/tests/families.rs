use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use pricegap::constructions::{
    dirac_worst_case, staircase, tight_pair, triangular_regular, trunc_exp_mhr, unbounded_flat, unbounded_flat_default,
};
use pricegap::{analyze, diagnose_shape, SearchConfig, Verdict, WideFloat};

fn harmonic(k: usize) -> BigRational {
    (1..=k).fold(BigRational::zero(), |acc, i| acc + BigRational::new(BigInt::one(), BigInt::from(i)))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

#[test]
fn staircase_ratio_is_inverse_harmonic() {
    for k in [2usize, 5, 10, 100, 1000] {
        let c = staircase::<f64>(k).unwrap();
        let r = analyze(&c.market, &cfg()).unwrap();
        let expect = 1.0 / to_f64(&harmonic(k));
        assert!((r.ratio - expect).abs() <= 1e-9, "K={k}: {} vs {expect}", r.ratio);
        assert!(r.ratio >= 1.0 / k as f64 - 1e-12);
    }
    let r = analyze(&staircase::<f64>(2).unwrap().market, &cfg()).unwrap();
    assert!((r.ratio - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn staircase_lowest_tie_is_first_peak() {
    let r = analyze(&staircase::<f64>(5).unwrap().market, &cfg()).unwrap();
    assert!((r.uniform_price - 0.2).abs() < 1e-12, "{}", r.uniform_price);
}

#[test]
fn triangular_two_segments_closed_form() {
    let c = triangular_regular::<f64>(2).unwrap();
    let r = analyze(&c.market, &cfg()).unwrap();
    assert!((r.pi_uniform - 7.0 / 24.0).abs() < 1e-9);
    assert!((r.pi_star - 3.0 / 8.0).abs() < 1e-9);
    assert!((r.ratio - 7.0 / 9.0).abs() < 1e-9);
}

#[test]
fn triangular_closed_form_sums() {
    // Π⋆ = H_K / (2K), Πᵁ = (1/K) Σ_{k=1}^{K} 1/(2K+1-k) = (H_{2K} - H_K)/K
    for k in [3usize, 8, 40] {
        let r = analyze(&triangular_regular::<f64>(k).unwrap().market, &cfg()).unwrap();
        let hk = harmonic(k);
        let star = to_f64(&(hk.clone() / BigRational::from_integer(BigInt::from(2 * k))));
        let uni = to_f64(&((harmonic(2 * k) - hk) / BigRational::from_integer(BigInt::from(k))));
        assert!((r.pi_star - star).abs() < 1e-12, "K={k}");
        assert!((r.pi_uniform - uni).abs() < 1e-9, "K={k}: {} vs {uni}", r.pi_uniform);
    }
}

#[test]
fn triangular_asymptotics() {
    for k in [256usize, 1024] {
        let r = analyze(&triangular_regular::<f64>(k).unwrap().market, &cfg()).unwrap();
        let approx = 2.0 * 2f64.ln() / (k as f64).ln();
        assert!((r.ratio - approx).abs() <= 0.25 * approx, "K={k}: {} vs {approx}", r.ratio);
    }
}

#[test]
fn triangular_segments_are_regular_not_concave() {
    let d = diagnose_shape(&triangular_regular::<f64>(4).unwrap().market, 256).unwrap();
    assert!(d.regular.iter().all(|v| *v == Verdict::Holds));
    assert!(d.concave_profit.iter().all(|&c| !c));
}

#[test]
fn trunc_exp_matches_reference_value() {
    let c = trunc_exp_mhr(5, 10.0f64).unwrap();
    let r = analyze(&c.market, &cfg()).unwrap();
    // reference computed offline by dense search: 0.14172862041220768
    assert!((r.pi_uniform - 0.14172862041220768).abs() < 1e-10, "{}", r.pi_uniform);
    assert!((0.13..=0.15).contains(&r.pi_uniform));
    let d = diagnose_shape(&c.market, 1000).unwrap();
    assert!(d.mhr.iter().all(|v| *v == Verdict::Holds));
    assert!(d.regular.iter().all(|v| *v == Verdict::Holds));
}

#[test]
fn trunc_exp_uniform_profit_below_inverse_k() {
    for k in [5usize, 50, 500] {
        let r = analyze(&trunc_exp_mhr(k, 10.0f64).unwrap().market, &cfg()).unwrap();
        assert!(r.pi_uniform <= 1.0 / k as f64 + 1e-9, "K={k}");
    }
}

#[test]
fn dirac_ratio_is_exact() {
    for k in [2usize, 10, 100] {
        for eps in [0.1, 0.01] {
            let r = analyze(&dirac_worst_case(k, eps).unwrap().market, &cfg()).unwrap();
            let expect = (1.0 + eps) / k as f64;
            assert!((r.ratio - expect).abs() <= 1e-12, "K={k} eps={eps}: {}", r.ratio);
        }
    }
}

#[test]
fn unbounded_flat_ratio_one() {
    for peaks in [vec![1.0f64], vec![0.5, 2.0, 7.0], vec![1.0, 1.5, 2.0, 40.0]] {
        let r = analyze(&unbounded_flat(&peaks).unwrap().market, &cfg()).unwrap();
        assert!((r.ratio - 1.0).abs() <= 1e-9, "{peaks:?}: {}", r.ratio);
        assert!(r.midpoint_price.is_none());
    }
    let d = diagnose_shape(&unbounded_flat_default::<f64>(5).unwrap().market, 64).unwrap();
    assert!(d.concave_profit.iter().all(|&c| c));
}

#[test]
fn tight_pair_ratio_decreases_to_half() {
    let mut last = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let c = tight_pair(WideFloat::from_f64(2.0), WideFloat::from_f64(eps), None).unwrap();
        let d = diagnose_shape(&c.market, 256).unwrap();
        assert!(d.meets_half_guarantee_hypotheses(), "eps={eps}: {d:?}");
        let r = analyze(&c.market, &cfg()).unwrap();
        let ratio = r.ratio.to_f64();
        assert!(ratio >= 0.5 && ratio <= 0.5 + eps * 1.5 + 1e-6, "eps={eps}: {ratio}");
        assert!(ratio <= last);
        last = ratio;
        assert!(r.pi_lower_envelope.unwrap().to_f64() >= 0.5 - 1e-12);
        assert!(r.pi_midpoint.unwrap() <= r.pi_uniform);
        assert!(r.pi_random_expect.unwrap().to_f64() >= 0.5 * r.pi_star.to_f64() - 1e-6);
    }
}

#[test]
fn tight_pair_lambda_metadata() {
    let c = tight_pair(2.0f64, 0.01, None).unwrap();
    let l1: f64 = c.metadata["lambda1"].parse().unwrap();
    assert!((l1 - 0.7968).abs() < 1e-4);
}

#[test]
fn ratios_shrink_with_k() {
    let ks = [2usize, 4, 8, 16, 32, 64, 128, 256, 512, 1024];
    let mut prev = [f64::INFINITY; 3];
    let mut first = [0.0; 3];
    for k in ks {
        let rs = [
            analyze(&staircase::<f64>(k).unwrap().market, &cfg()).unwrap().ratio,
            analyze(&triangular_regular::<f64>(k).unwrap().market, &cfg()).unwrap().ratio,
            analyze(&trunc_exp_mhr(k, 10.0f64).unwrap().market, &cfg()).unwrap().ratio,
        ];
        for i in 0..3 {
            assert!(rs[i] <= prev[i] + 1e-12, "family {i} K={k}");
            assert!(rs[i] >= 1.0 / k as f64 - 1e-12);
            if k == 2 {
                first[i] = rs[i];
            }
            prev[i] = rs[i];
        }
    }
    for i in 0..3 {
        assert!(prev[i] < 0.5 * first[i], "family {i}: {} vs {}", prev[i], first[i]);
    }
}
