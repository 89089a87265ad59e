//! Instance files: a named construction or an explicit market, as JSON.

use std::collections::BTreeMap;
use std::path::Path;

use pricegap::{
    Atom, ConstructionParams, DistributionKind, Family, Market, MarketInstance, PiecewiseSurvival, Scalar, Segment,
    SegmentDistribution, SurvivalPiece, WideFloat,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub schema_version: u32,
    #[serde(flatten)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Construction(ConstructionSpec),
    Explicit(ExplicitMarket),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peaks: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMarket {
    pub cost: f64,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub weight: f64,
    #[serde(flatten)]
    pub dist: DistSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    TruncatedExponential {
        rate: f64,
        cap: f64,
    },
    Triangular {
        peak: f64,
        mass: f64,
    },
    Dirac {
        value: f64,
    },
    /// `[value, probability]` pairs.
    Discrete {
        atoms: Vec<[f64; 2]>,
    },
    /// Survival given piece by piece; a missing `hi` means unbounded support.
    Piecewise {
        lo: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
        breakpoints: Vec<f64>,
        pieces: Vec<PieceSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub template: String,
    pub params: Vec<f64>,
}

/// A market ready for analysis. The tight pair needs the wide exponent range.
#[derive(Debug, Clone)]
pub enum Built {
    F64(Market),
    Wide(MarketInstance<WideFloat>),
}

impl Built {
    pub fn k(&self) -> usize {
        match self {
            Built::F64(m) => m.k(),
            Built::Wide(m) => m.k(),
        }
    }
}

impl ConstructionSpec {
    pub fn params(&self) -> Result<ConstructionParams, CliError> {
        let family: Family = self.family.parse()?;
        Ok(ConstructionParams {
            family: Some(family),
            k: self.k,
            epsilon: self.epsilon,
            a: self.a,
            l_cap: self.l_cap,
            kappa: self.kappa,
            peaks: self.peaks.clone(),
        })
    }

    pub fn from_params(p: &ConstructionParams) -> Self {
        ConstructionSpec {
            family: p.family.map(|f| f.name().to_string()).unwrap_or_default(),
            k: p.k,
            epsilon: p.epsilon,
            a: p.a,
            l_cap: p.l_cap,
            kappa: p.kappa,
            peaks: p.peaks.clone(),
        }
    }

    /// Builds the market and the solved parameters.
    pub fn build(&self) -> Result<(Built, BTreeMap<String, String>), CliError> {
        let params = self.params()?;
        if params.family()? == Family::TightPair {
            let c = params.build::<WideFloat>()?;
            Ok((Built::Wide(c.market), c.metadata))
        } else {
            let c = params.build::<f64>()?;
            Ok((Built::F64(c.market), c.metadata))
        }
    }
}

impl InstanceSpec {
    pub fn construction(c: ConstructionSpec, metadata: BTreeMap<String, String>) -> Self {
        InstanceSpec { schema_version: SCHEMA_VERSION, source: Source::Construction(c), metadata }
    }

    pub fn explicit(m: ExplicitMarket) -> Self {
        InstanceSpec { schema_version: SCHEMA_VERSION, source: Source::Explicit(m), metadata: BTreeMap::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: InstanceSpec =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("cannot parse instance: {e}")))?;
        if spec.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                spec.schema_version
            )));
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance specs always serialize")
    }

    pub fn family_name(&self) -> &str {
        match &self.source {
            Source::Construction(c) => &c.family,
            Source::Explicit(_) => "explicit",
        }
    }

    pub fn build(&self) -> Result<Built, CliError> {
        match &self.source {
            Source::Construction(c) => Ok(c.build()?.0),
            Source::Explicit(m) => Ok(Built::F64(m.to_market()?)),
        }
    }
}

impl ExplicitMarket {
    pub fn to_market(&self) -> Result<Market, CliError> {
        let segments = self
            .segments
            .iter()
            .map(|s| Ok(Segment::new(s.weight, s.dist.to_distribution()?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(MarketInstance::new(segments, self.cost)?)
    }

    /// Inverse of [`ExplicitMarket::to_market`]; fails on values outside the f64 range.
    pub fn from_market<T: Scalar>(m: &MarketInstance<T>) -> Result<Self, CliError> {
        let segments = m
            .segments()
            .iter()
            .map(|s| Ok(SegmentSpec { weight: finite(s.weight)?, dist: DistSpec::from_distribution(&s.dist)? }))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(ExplicitMarket { cost: finite(m.cost())?, segments })
    }
}

fn finite<T: Scalar>(x: T) -> Result<f64, CliError> {
    let f = x.to_f64_lossy();
    if f.is_finite() && (f != 0.0 || x == T::zero()) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("value {x} does not fit an f64 instance file")))
    }
}

impl DistSpec {
    pub fn to_distribution(&self) -> Result<SegmentDistribution<f64>, CliError> {
        let d = match self {
            DistSpec::Uniform { lo, hi } => SegmentDistribution::uniform(*lo, *hi)?,
            DistSpec::TruncatedExponential { rate, cap } => SegmentDistribution::truncated_exponential(*rate, *cap)?,
            DistSpec::Triangular { peak, mass } => SegmentDistribution::triangular(*peak, *mass)?,
            DistSpec::Dirac { value } => SegmentDistribution::dirac(*value)?,
            DistSpec::Discrete { atoms } => SegmentDistribution::discrete(atoms.iter().map(|a| (a[0], a[1])))?,
            DistSpec::Piecewise { lo, hi, breakpoints, pieces } => {
                let pieces = pieces
                    .iter()
                    .map(|p| SurvivalPiece::from_template(&p.template, &p.params))
                    .collect::<pricegap::Result<Vec<_>>>()?;
                let s = PiecewiseSurvival::new(*lo, hi.unwrap_or(f64::INFINITY), breakpoints.clone(), pieces)?;
                SegmentDistribution::piecewise(s)
            }
        };
        Ok(d)
    }

    pub fn from_distribution<T: Scalar>(d: &SegmentDistribution<T>) -> Result<Self, CliError> {
        Ok(match d.kind() {
            DistributionKind::Uniform { lo, hi } => DistSpec::Uniform { lo: finite(*lo)?, hi: finite(*hi)? },
            DistributionKind::TruncatedExponential { rate, cap } => {
                DistSpec::TruncatedExponential { rate: finite(*rate)?, cap: finite(*cap)? }
            }
            DistributionKind::Triangular { peak, mass } => {
                DistSpec::Triangular { peak: finite(*peak)?, mass: finite(*mass)? }
            }
            DistributionKind::Dirac { value } => DistSpec::Dirac { value: finite(*value)? },
            DistributionKind::Discrete { atoms } => DistSpec::Discrete {
                atoms: atoms.iter().map(|&Atom { value, prob }| Ok([finite(value)?, finite(prob)?])).collect::<Result<
                    _,
                    CliError,
                >>(
                )?,
            },
            DistributionKind::Piecewise(s) => DistSpec::Piecewise {
                lo: finite(s.lo())?,
                hi: if s.hi().is_finite() { Some(finite(s.hi())?) } else { None },
                breakpoints: s.breakpoints().iter().map(|&b| finite(b)).collect::<Result<_, _>>()?,
                pieces: s
                    .pieces()
                    .iter()
                    .map(|p| {
                        Ok(PieceSpec {
                            template: p.template().to_string(),
                            params: p.params().into_iter().map(finite).collect::<Result<_, _>>()?,
                        })
                    })
                    .collect::<Result<_, CliError>>()?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_round_trip() {
        let mut c = ConstructionSpec { family: "dirac".into(), k: Some(2), ..Default::default() };
        c.epsilon = Some(0.1);
        let spec = InstanceSpec::construction(c, BTreeMap::from([("atoms".into(), "0.55,5.5".into())]));
        let back = InstanceSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn explicit_round_trip_through_market() {
        let json = r#"{
            "schema_version": 1,
            "explicit": {
                "cost": 0.0,
                "segments": [
                    {"weight": 0.5, "kind": "uniform", "lo": 0.0, "hi": 1.0},
                    {"weight": 0.25, "kind": "discrete", "atoms": [[0.5, 0.25], [0.75, 0.75]]},
                    {"weight": 0.25, "kind": "piecewise", "lo": 0.0, "hi": 1.0, "breakpoints": [0.5],
                     "pieces": [{"template": "affine", "params": [1.0, -0.5]},
                                {"template": "affine", "params": [1.5, -1.5]}]}
                ]
            }
        }"#;
        let spec = InstanceSpec::from_json(json).unwrap();
        let Built::F64(m) = spec.build().unwrap() else { panic!("expected f64 market") };
        let again = ExplicitMarket::from_market(&m).unwrap();
        assert_eq!(Source::Explicit(again), spec.source);
    }

    #[test]
    fn unbounded_piecewise_omits_hi() {
        let c = pricegap::constructions::unbounded_flat(&[1.0, 2.0]).unwrap();
        let e = ExplicitMarket::from_market(&c.market).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert!(!json.contains("\"hi\""));
        assert_eq!(e.to_market().unwrap(), c.market);
    }

    #[test]
    fn rejects_wrong_schema_and_garbage() {
        assert!(matches!(InstanceSpec::from_json("{"), Err(CliError::Usage(_))));
        let bad = r#"{"schema_version": 7, "construction": {"family": "staircase", "k": 3}}"#;
        assert!(matches!(InstanceSpec::from_json(bad), Err(CliError::Usage(_))));
        let unknown = r#"{"schema_version": 1, "construction": {"family": "nope", "k": 3}}"#;
        assert!(matches!(InstanceSpec::from_json(unknown).unwrap().build(), Err(CliError::Usage(_))));
    }

    #[test]
    fn wide_values_do_not_fit() {
        let c = pricegap::constructions::tight_pair(WideFloat::lit(2.0), WideFloat::lit(1e-3), None).unwrap();
        assert!(ExplicitMarket::from_market(&c.market).is_err());
    }
}
