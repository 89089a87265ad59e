//! Profit of uniform pricing versus third-degree price discrimination.
//!
//! A market is a weighted list of segments, each with its own value
//! distribution, sold to at a common marginal cost. [`pricing::analyze`]
//! computes the discriminatory optimum `Π⋆`, the best uniform price `Πᵁ`,
//! their ratio and the simple-pricing bounds; [`constructions`] builds the
//! standard families whose ratios are known in closed form.
//!
//! Everything is generic over [`Scalar`] (`f32`, `f64`, [`WideFloat`]).
//! The aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

pub mod constructions;
pub mod distribution;
pub mod error;
pub mod market;
pub mod pricing;
pub mod quadrature;
pub mod scalar;
pub mod screening;
pub mod search;
pub mod shape;
pub mod wide;

pub use constructions::{Construction, ConstructionParams, Family};
pub use distribution::{Atom, DistributionKind, PiecewiseSurvival, SegmentDistribution, SurvivalPiece};
pub use error::{Error, Result};
pub use market::{market_profit, segment_profit, MarketInstance, Segment};
pub use pricing::{
    analyze, lower_envelope_profit, midpoint_price_profit, optimal_segment_price, optimal_uniform_price,
    random_pricing_expectation, LowerEnvelope, PricingReport, SearchConfig,
};
pub use scalar::Scalar;
pub use screening::{interim_rent_floor, static_profit, threshold_seq_optimum, ScreeningInstance, ScreeningReport};
pub use shape::{diagnose_shape, ShapeDiagnosis, Verdict};
pub use wide::WideFloat;

pub type Distribution = SegmentDistribution<f64>;
pub type Market = MarketInstance<f64>;
pub type Report = PricingReport<f64>;
pub type Screening = ScreeningInstance<f64>;
pub type WideMarket = MarketInstance<WideFloat>;
pub type WideReport = PricingReport<WideFloat>;
