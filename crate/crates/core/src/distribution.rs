//! Segment value distributions.
//!
//! Everything is phrased through the survival function. Two conventions are
//! exposed:
//!
//! * [`SegmentDistribution::survival`] is `Pr[θ ≥ p]`. A buyer purchases when
//!   her value is at least the price, so atoms count at their own location.
//!   All profit maximization uses this one.
//! * [`SegmentDistribution::survival_open`] is `Pr[θ > p] = 1 − F(p)` with the
//!   usual right-continuous CDF. Shape diagnostics use it.
//!
//! The two only differ at atoms.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const CONTINUITY_TOL: f64 = 1e-8;
const MONOTONE_SAMPLES: usize = 33;
const TOP_ATOM_MIN: f64 = 1e-12;

/// A closed-form survival expression valid on one interval of a piecewise
/// distribution. Each variant is a named template with a fixed parameter list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurvivalPiece<T> {
    /// `S(p) = intercept + slope · p`
    Affine { intercept: T, slope: T },
    /// `S(p) = (level + slope · (p − anchor)) / p`, i.e. profit `p·S(p)` is
    /// linear through `(anchor, level)`.
    ProfitLinear { anchor: T, level: T, slope: T },
    /// `S(p) = (1 − e^{−rate·p}) / (rate · p)`, with `S(0) = 1`.
    ExpRatio { rate: T },
}

impl<T: Scalar> SurvivalPiece<T> {
    pub fn value(&self, p: T) -> T {
        match *self {
            SurvivalPiece::Affine { intercept, slope } => intercept + slope * p,
            SurvivalPiece::ProfitLinear { anchor, level, slope } => {
                if p == T::zero() {
                    T::one()
                } else {
                    (level + slope * (p - anchor)) / p
                }
            }
            SurvivalPiece::ExpRatio { rate } => {
                let x = rate * p;
                if x == T::zero() {
                    T::one()
                } else {
                    -(-x).exp_m1() / x
                }
            }
        }
    }

    pub fn derivative(&self, p: T) -> T {
        match *self {
            SurvivalPiece::Affine { slope, .. } => slope,
            SurvivalPiece::ProfitLinear { anchor, level, slope } => -(level - slope * anchor) / (p * p),
            SurvivalPiece::ExpRatio { rate } => {
                let x = rate * p;
                if x < T::lit(1e-4) {
                    // series of (x e^{-x} - (1 - e^{-x})) / x^2
                    rate * (T::lit(-0.5) + x / T::lit(3.0) - x * x / T::lit(8.0))
                } else {
                    let e = (-x).exp();
                    rate * (x * e + (-x).exp_m1()) / (x * x)
                }
            }
        }
    }

    pub fn template(&self) -> &'static str {
        match self {
            SurvivalPiece::Affine { .. } => "affine",
            SurvivalPiece::ProfitLinear { .. } => "profit_linear",
            SurvivalPiece::ExpRatio { .. } => "exp_ratio",
        }
    }

    pub fn params(&self) -> Vec<T> {
        match *self {
            SurvivalPiece::Affine { intercept, slope } => vec![intercept, slope],
            SurvivalPiece::ProfitLinear { anchor, level, slope } => vec![anchor, level, slope],
            SurvivalPiece::ExpRatio { rate } => vec![rate],
        }
    }

    pub fn from_template(name: &str, params: &[T]) -> Result<Self> {
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!("template `{name}` takes {n} parameters, got {}", params.len())))
            }
        };
        match name {
            "affine" => {
                want(2)?;
                Ok(SurvivalPiece::Affine { intercept: params[0], slope: params[1] })
            }
            "profit_linear" => {
                want(3)?;
                Ok(SurvivalPiece::ProfitLinear { anchor: params[0], level: params[1], slope: params[2] })
            }
            "exp_ratio" => {
                want(1)?;
                if !(params[0] > T::zero()) {
                    return Err(Error::InvalidDistribution("exp_ratio rate must be positive".into()));
                }
                Ok(SurvivalPiece::ExpRatio { rate: params[0] })
            }
            other => Err(Error::InvalidDistribution(format!("unknown piece template `{other}`"))),
        }
    }
}

/// Survival function given piece by piece on `[lo, hi]`.
///
/// Piece `i` covers `[b_{i−1}, b_i)` where `b_0 = lo` and the last piece ends
/// at `hi` (inclusive; `hi` may be `+∞`). The survival must be continuous at
/// interior breakpoints; only `hi` may carry an atom.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSurvival<T> {
    lo: T,
    hi: T,
    breakpoints: Vec<T>,
    pieces: Vec<SurvivalPiece<T>>,
}

impl<T: Scalar> PiecewiseSurvival<T> {
    pub fn new(lo: T, hi: T, breakpoints: Vec<T>, pieces: Vec<SurvivalPiece<T>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if pieces.len() != breakpoints.len() + 1 {
            return bad(format!(
                "{} pieces need {} breakpoints, got {}",
                pieces.len(),
                pieces.len().saturating_sub(1),
                breakpoints.len()
            ));
        }
        if !(lo.is_finite() && lo >= T::zero()) {
            return bad("lower support end must be finite and nonnegative".into());
        }
        if !(hi > lo) || hi.is_nan() {
            return bad("upper support end must exceed the lower end".into());
        }
        let mut prev = lo;
        for &b in &breakpoints {
            if !(b > prev && b < hi) {
                return bad("breakpoints must be strictly increasing inside (lo, hi)".into());
            }
            prev = b;
        }
        let s = PiecewiseSurvival { lo, hi, breakpoints, pieces };

        let tol = T::tol(CONTINUITY_TOL);
        if (s.pieces[0].value(lo) - T::one()).abs() > tol {
            return bad(format!("survival at the lower end is {}, expected 1", s.pieces[0].value(lo)));
        }
        for (i, &b) in s.breakpoints.iter().enumerate() {
            let l = s.pieces[i].value(b);
            let r = s.pieces[i + 1].value(b);
            if (l - r).abs() > tol * l.abs().max(r.abs()) {
                return bad(format!("survival jumps at breakpoint {b}: {l} vs {r}"));
            }
        }
        for i in 0..s.pieces.len() {
            let (a, b) = s.piece_span(i);
            let b = if b.is_finite() { b } else { a * T::lit(4.0) + T::one() };
            let mut last = T::infinity();
            for j in 0..MONOTONE_SAMPLES {
                let t = T::from_usize(j) / T::from_usize(MONOTONE_SAMPLES - 1);
                let p = a + (b - a) * t;
                let v = s.pieces[i].value(p);
                if v.is_nan() || v < -tol || v > T::one() + tol {
                    return bad(format!("survival {v} at {p} is outside [0, 1]"));
                }
                if v > last + tol * last.abs().max(T::min_positive_value()) {
                    return bad(format!("survival increases near {p}"));
                }
                last = v;
            }
        }
        Ok(s)
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[SurvivalPiece<T>] {
        &self.pieces
    }

    /// Interval covered by piece `i`.
    pub fn piece_span(&self, i: usize) -> (T, T) {
        let a = if i == 0 { self.lo } else { self.breakpoints[i - 1] };
        let b = if i == self.pieces.len() - 1 { self.hi } else { self.breakpoints[i] };
        (a, b)
    }

    fn piece_index(&self, p: T) -> usize {
        self.breakpoints.partition_point(|&b| b <= p)
    }

    fn raw(&self, p: T) -> T {
        self.pieces[self.piece_index(p)].value(p).max(T::zero()).min(T::one())
    }

    /// Mass at the top of the support; rounding residue below `1e-12` is dropped.
    fn top_mass(&self) -> T {
        if !self.hi.is_finite() {
            return T::zero();
        }
        let m = self.raw(self.hi);
        if m > T::lit(TOP_ATOM_MIN) {
            m
        } else {
            T::zero()
        }
    }

    fn survival_closed(&self, p: T) -> T {
        if p < self.lo {
            T::one()
        } else if p > self.hi {
            T::zero()
        } else if p == self.hi {
            self.top_mass()
        } else {
            self.raw(p)
        }
    }

    fn survival_open(&self, p: T) -> T {
        if p < self.lo {
            T::one()
        } else if p >= self.hi {
            T::zero()
        } else {
            self.raw(p)
        }
    }

    fn density(&self, p: T) -> T {
        if p < self.lo || p >= self.hi {
            return T::zero();
        }
        (-self.pieces[self.piece_index(p)].derivative(p)).max(T::zero())
    }

    /// Start of a constant-profit tail `S(p) = level / p` on an unbounded support.
    pub fn flat_profit_tail(&self) -> Option<T> {
        if self.hi.is_finite() {
            return None;
        }
        match self.pieces.last()? {
            SurvivalPiece::ProfitLinear { slope, .. } if *slope == T::zero() => {
                Some(self.breakpoints.last().copied().unwrap_or(self.lo))
            }
            _ => None,
        }
    }
}

/// A probability mass at `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub value: T,
    pub prob: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind<T> {
    Uniform {
        lo: T,
        hi: T,
    },
    /// Exponential with the given rate, conditioned on `[0, cap]`.
    TruncatedExponential {
        rate: T,
        cap: T,
    },
    /// Revenue curve in quantile space is a triangle: `F(p) = p(1−q) / (p(1−q) + v q)`
    /// below `peak = v`, with an atom of mass `q` at `v`.
    Triangular {
        peak: T,
        mass: T,
    },
    Dirac {
        value: T,
    },
    /// Finitely many atoms, sorted by value.
    Discrete {
        atoms: Vec<Atom<T>>,
    },
    Piecewise(PiecewiseSurvival<T>),
}

/// Demand distribution of one market segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDistribution<T> {
    kind: DistributionKind<T>,
}

fn positive<T: Scalar>(x: T, what: &str) -> Result<()> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!("{what} must be finite and positive, got {x}")))
    }
}

impl<T: Scalar> SegmentDistribution<T> {
    pub fn new(kind: DistributionKind<T>) -> Result<Self> {
        match &kind {
            DistributionKind::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= T::zero() && hi > lo) {
                    return Err(Error::InvalidDistribution(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")));
                }
            }
            DistributionKind::TruncatedExponential { rate, cap } => {
                positive(*rate, "rate")?;
                positive(*cap, "cap")?;
            }
            DistributionKind::Triangular { peak, mass } => {
                positive(*peak, "peak")?;
                if !(*mass > T::zero() && *mass <= T::one()) {
                    return Err(Error::InvalidDistribution(format!("triangular mass must lie in (0, 1], got {mass}")));
                }
            }
            DistributionKind::Dirac { value } => {
                if !(value.is_finite() && *value >= T::zero()) {
                    return Err(Error::InvalidDistribution(format!(
                        "dirac value must be finite and nonnegative, got {value}"
                    )));
                }
            }
            DistributionKind::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution("discrete distribution without atoms".into()));
                }
                let mut total = T::zero();
                for (i, a) in atoms.iter().enumerate() {
                    if !(a.value.is_finite() && a.value >= T::zero() && a.prob > T::zero() && a.prob.is_finite()) {
                        return Err(Error::InvalidDistribution(
                            "atoms need finite nonnegative values and positive mass".into(),
                        ));
                    }
                    if i > 0 && !(a.value > atoms[i - 1].value) {
                        return Err(Error::InvalidDistribution("atoms must be strictly increasing in value".into()));
                    }
                    total = total + a.prob;
                }
                if (total - T::one()).abs() > T::tol(1e-12) {
                    return Err(Error::InvalidDistribution(format!("atom masses sum to {total}")));
                }
            }
            DistributionKind::Piecewise(_) => {}
        }
        Ok(SegmentDistribution { kind })
    }

    pub fn uniform(lo: T, hi: T) -> Result<Self> {
        Self::new(DistributionKind::Uniform { lo, hi })
    }

    pub fn truncated_exponential(rate: T, cap: T) -> Result<Self> {
        Self::new(DistributionKind::TruncatedExponential { rate, cap })
    }

    pub fn triangular(peak: T, mass: T) -> Result<Self> {
        Self::new(DistributionKind::Triangular { peak, mass })
    }

    pub fn dirac(value: T) -> Result<Self> {
        Self::new(DistributionKind::Dirac { value })
    }

    /// Atoms in any order; equal values are merged.
    pub fn discrete(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let mut v: Vec<Atom<T>> = atoms.into_iter().map(|(value, prob)| Atom { value, prob }).collect();
        v.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<Atom<T>> = Vec::with_capacity(v.len());
        for a in v {
            match merged.last_mut() {
                Some(last) if last.value == a.value => last.prob = last.prob + a.prob,
                _ => merged.push(a),
            }
        }
        Self::new(DistributionKind::Discrete { atoms: merged })
    }

    pub fn piecewise(s: PiecewiseSurvival<T>) -> Self {
        SegmentDistribution { kind: DistributionKind::Piecewise(s) }
    }

    pub fn kind(&self) -> &DistributionKind<T> {
        &self.kind
    }

    pub fn support_lo(&self) -> T {
        match &self.kind {
            DistributionKind::Uniform { lo, .. } => *lo,
            DistributionKind::TruncatedExponential { .. } | DistributionKind::Triangular { .. } => T::zero(),
            DistributionKind::Dirac { value } => *value,
            DistributionKind::Discrete { atoms } => atoms[0].value,
            DistributionKind::Piecewise(s) => s.lo,
        }
    }

    /// Upper support end; `+∞` for unbounded piecewise distributions.
    pub fn support_hi(&self) -> T {
        match &self.kind {
            DistributionKind::Uniform { hi, .. } => *hi,
            DistributionKind::TruncatedExponential { cap, .. } => *cap,
            DistributionKind::Triangular { peak, .. } => *peak,
            DistributionKind::Dirac { value } => *value,
            DistributionKind::Discrete { atoms } => atoms[atoms.len() - 1].value,
            DistributionKind::Piecewise(s) => s.hi,
        }
    }

    /// `Pr[θ ≥ p]`.
    pub fn survival(&self, p: T) -> T {
        match &self.kind {
            DistributionKind::Piecewise(s) => s.survival_closed(p),
            DistributionKind::Triangular { peak, mass } if p == *peak => *mass,
            DistributionKind::Dirac { value } => {
                if p <= *value {
                    T::one()
                } else {
                    T::zero()
                }
            }
            DistributionKind::Discrete { atoms } => {
                atoms.iter().filter(|a| a.value >= p).fold(T::zero(), |acc, a| acc + a.prob).min(T::one())
            }
            _ => self.survival_open(p),
        }
    }

    /// `Pr[θ > p] = 1 − F(p)`.
    pub fn survival_open(&self, p: T) -> T {
        let one = T::one();
        let zero = T::zero();
        match &self.kind {
            DistributionKind::Uniform { lo, hi } => {
                if p <= *lo {
                    one
                } else if p >= *hi {
                    zero
                } else {
                    (*hi - p) / (*hi - *lo)
                }
            }
            DistributionKind::TruncatedExponential { rate, cap } => {
                if p <= zero {
                    one
                } else if p >= *cap {
                    zero
                } else {
                    // e^{-λp}(1 - e^{-λ(L-p)}) / (1 - e^{-λL})
                    let num = -(-*rate * p).exp() * (-*rate * (*cap - p)).exp_m1();
                    let den = -(-*rate * *cap).exp_m1();
                    (num / den).min(one)
                }
            }
            DistributionKind::Triangular { peak, mass } => {
                if p >= *peak {
                    zero
                } else if p <= zero {
                    one
                } else {
                    let vq = *peak * *mass;
                    vq / (p * (one - *mass) + vq)
                }
            }
            DistributionKind::Dirac { value } => {
                if p < *value {
                    one
                } else {
                    zero
                }
            }
            DistributionKind::Discrete { atoms } => {
                atoms.iter().filter(|a| a.value > p).fold(zero, |acc, a| acc + a.prob).min(one)
            }
            DistributionKind::Piecewise(s) => s.survival_open(p),
        }
    }

    pub fn cdf(&self, p: T) -> T {
        T::one() - self.survival_open(p)
    }

    /// Density where it exists; `None` at atoms and for purely atomic kinds.
    pub fn density(&self, p: T) -> Option<T> {
        let zero = T::zero();
        match &self.kind {
            DistributionKind::Uniform { lo, hi } => {
                Some(if p >= *lo && p <= *hi { T::one() / (*hi - *lo) } else { zero })
            }
            DistributionKind::TruncatedExponential { rate, cap } => {
                Some(if p >= zero && p <= *cap { *rate * (-*rate * p).exp() / -(-*rate * *cap).exp_m1() } else { zero })
            }
            DistributionKind::Triangular { peak, mass } => {
                if p == *peak {
                    None
                } else if p > *peak || p < zero {
                    Some(zero)
                } else {
                    let vq = *peak * *mass;
                    let d = p * (T::one() - *mass) + vq;
                    Some(vq * (T::one() - *mass) / (d * d))
                }
            }
            DistributionKind::Dirac { .. } | DistributionKind::Discrete { .. } => None,
            DistributionKind::Piecewise(s) => {
                if p == s.hi && s.top_mass() > zero {
                    None
                } else {
                    Some(s.density(p))
                }
            }
        }
    }

    pub fn has_density(&self) -> bool {
        !self.is_atomic()
    }

    /// Purely atomic (Dirac or discrete).
    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, DistributionKind::Dirac { .. } | DistributionKind::Discrete { .. })
    }

    /// Locations carrying positive probability mass.
    pub fn atoms(&self) -> Vec<T> {
        match &self.kind {
            DistributionKind::Dirac { value } => vec![*value],
            DistributionKind::Discrete { atoms } => atoms.iter().map(|a| a.value).collect(),
            DistributionKind::Triangular { peak, .. } => vec![*peak],
            DistributionKind::Piecewise(s) if s.top_mass() > T::zero() => vec![s.hi],
            _ => Vec::new(),
        }
    }

    /// Finite support endpoints, kinks and atoms, ascending.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.kind {
            DistributionKind::Uniform { lo, hi } => vec![*lo, *hi],
            DistributionKind::TruncatedExponential { cap, .. } => vec![T::zero(), *cap],
            DistributionKind::Triangular { peak, .. } => vec![T::zero(), *peak],
            DistributionKind::Dirac { value } => vec![*value],
            DistributionKind::Discrete { atoms } => atoms.iter().map(|a| a.value).collect(),
            DistributionKind::Piecewise(s) => {
                let mut v = Vec::with_capacity(s.breakpoints.len() + 2);
                v.push(s.lo);
                v.extend_from_slice(&s.breakpoints);
                if s.hi.is_finite() {
                    v.push(s.hi);
                }
                v
            }
        }
    }

    /// See [`PiecewiseSurvival::flat_profit_tail`].
    pub fn flat_profit_tail(&self) -> Option<T> {
        match &self.kind {
            DistributionKind::Piecewise(s) => s.flat_profit_tail(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn endpoints_of_atomless_kinds() {
        let dists = vec![
            SegmentDistribution::uniform(0.0, 1.0).unwrap(),
            SegmentDistribution::uniform(0.3, 2.0).unwrap(),
            SegmentDistribution::truncated_exponential(3.0, 10.0).unwrap(),
            SegmentDistribution::piecewise(
                PiecewiseSurvival::new(
                    0.0,
                    2.0,
                    vec![1.0],
                    vec![
                        SurvivalPiece::Affine { intercept: 1.0, slope: -0.25 },
                        SurvivalPiece::Affine { intercept: 1.5, slope: -0.75 },
                    ],
                )
                .unwrap(),
            ),
        ];
        for d in &dists {
            assert_abs_diff_eq!(d.cdf(d.support_hi()), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.survival(d.support_lo()), 1.0, epsilon = 1e-12);
            assert!(d.atoms().is_empty());
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        let dists = vec![
            SegmentDistribution::uniform(0.5, 3.0).unwrap(),
            SegmentDistribution::truncated_exponential(5.0, 10.0).unwrap(),
            SegmentDistribution::truncated_exponential(0.2, 1.5).unwrap(),
        ];
        for d in &dists {
            let mass = simpson(|p| d.density(p).unwrap(), d.support_lo(), d.support_hi(), 20_000);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
        }
        // triangular: continuous part plus the atom
        let t = SegmentDistribution::triangular(1.0, 0.5).unwrap();
        let cont = simpson(|p| t.density(p).unwrap_or(0.0), 0.0, 1.0 - 1e-12, 20_000);
        assert_abs_diff_eq!(cont + 0.5, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn atom_conventions() {
        let d = SegmentDistribution::dirac(0.55).unwrap();
        assert_eq!(d.survival(0.55), 1.0);
        assert_eq!(d.survival_open(0.55), 0.0);
        assert_eq!(d.density(0.3), None);

        let t = SegmentDistribution::triangular(1.0, 0.5).unwrap();
        assert_eq!(t.survival(1.0), 0.5);
        assert_eq!(t.survival_open(1.0), 0.0);
        assert_abs_diff_eq!(t.cdf(0.5), 1.0 - 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(t.atoms(), vec![1.0]);
    }

    #[test]
    fn discrete_merges_and_sums() {
        let d = SegmentDistribution::discrete([(2.0, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        match d.kind() {
            DistributionKind::Discrete { atoms } => assert_eq!(atoms.len(), 2),
            _ => unreachable!(),
        }
        assert_eq!(d.survival(1.5), 0.5);
        assert_eq!(d.survival(1.0), 1.0);
        assert_eq!(d.survival_open(1.0), 0.5);
        assert!(SegmentDistribution::discrete([(1.0, 0.4)]).is_err());
    }

    #[test]
    fn exp_ratio_piece_is_smooth_at_zero() {
        let piece = SurvivalPiece::ExpRatio { rate: 0.8 };
        assert_eq!(piece.value(0.0), 1.0);
        let h = 1e-6;
        for &p in &[1e-7, 1e-3, 0.5, 2.0, 40.0] {
            let p: f64 = p;
            let fd = (piece.value(p + h) - piece.value((p - h).max(0.0))) / (p + h - (p - h).max(0.0));
            assert_abs_diff_eq!(piece.derivative(p), fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn piecewise_validation_rejects_bad_shapes() {
        let jump = PiecewiseSurvival::new(
            0.0,
            2.0,
            vec![1.0],
            vec![
                SurvivalPiece::Affine { intercept: 1.0, slope: -0.25 },
                SurvivalPiece::Affine { intercept: 0.5, slope: -0.25 },
            ],
        );
        assert!(jump.is_err());
        let rising =
            PiecewiseSurvival::new(0.0, 1.0, vec![], vec![SurvivalPiece::Affine { intercept: 1.0, slope: 0.1 }]);
        assert!(rising.is_err());
        let arity = SurvivalPiece::<f64>::from_template("affine", &[1.0]);
        assert!(arity.is_err());
        assert!(SurvivalPiece::<f64>::from_template("cubic", &[]).is_err());
    }

    #[test]
    fn template_roundtrip() {
        let pieces = [
            SurvivalPiece::Affine { intercept: 1.0, slope: -0.5 },
            SurvivalPiece::ProfitLinear { anchor: 2.0, level: 0.3, slope: -0.01 },
            SurvivalPiece::ExpRatio { rate: 0.7 },
        ];
        for p in pieces {
            assert_eq!(SurvivalPiece::from_template(p.template(), &p.params()).unwrap(), p);
        }
    }

    #[test]
    fn flat_tail_detection() {
        let s = PiecewiseSurvival::new(
            0.0,
            f64::INFINITY,
            vec![2.0],
            vec![
                SurvivalPiece::Affine { intercept: 1.0, slope: -1.0 / 8.0 },
                SurvivalPiece::ProfitLinear { anchor: 2.0, level: 1.5, slope: 0.0 },
            ],
        )
        .unwrap();
        let d = SegmentDistribution::piecewise(s);
        assert_eq!(d.flat_profit_tail(), Some(2.0));
        assert_eq!(d.support_hi(), f64::INFINITY);
        assert_abs_diff_eq!(d.survival(6.0) * 6.0, 1.5, epsilon = 1e-15);
    }
}
