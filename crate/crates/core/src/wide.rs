//! Double-precision mantissa with a 64-bit binary exponent.
//!
//! Some worst-case constructions need support endpoints such as `e^2000`
//! or `e^20000` next to prices of order one. `WideFloat` keeps 53 bits of
//! mantissa but lets the exponent range far beyond what `f64` can hold,
//! so the same generic optimizers run on them unchanged.
//!
//! Elementary functions are exact to within a few ulps for `exp`, `ln`,
//! `sqrt`, `powf` over the whole range. Trigonometric functions go through
//! `f64` and are only meaningful where the argument fits in an `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{Float, Num, NumCast, One, ToPrimitive, Zero};

const EXP_LIMIT: i64 = 1 << 52;
const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;

/// Extended-exponent float. Finite nonzero values are stored as
/// `mant * 2^exp` with `0.5 <= |mant| < 1`; zeros and non-finite values
/// keep `exp == 0`.
#[derive(Clone, Copy, Default)]
pub struct WideFloat {
    mant: f64,
    exp: i64,
}

/// 2^k for k in the normal f64 exponent range.
fn pow2(k: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        let (m, e) = frexp(x * pow2(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff_u64 << 52)) | (1022_u64 << 52));
    (m, raw - 1022)
}

fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if e > 1100 {
        return m.signum() * f64::INFINITY;
    }
    if e < -1200 {
        return m.signum() * 0.0;
    }
    let half = e / 2;
    m * pow2(half) * pow2(e - half)
}

impl WideFloat {
    pub const ZERO: WideFloat = WideFloat { mant: 0.0, exp: 0 };
    pub const ONE: WideFloat = WideFloat { mant: 0.5, exp: 1 };

    fn normalize(m: f64, e: i64) -> Self {
        if m == 0.0 || !m.is_finite() {
            return WideFloat { mant: m, exp: 0 };
        }
        let (mm, de) = frexp(m);
        let exp = e + de;
        if exp > EXP_LIMIT {
            return WideFloat { mant: mm.signum() * f64::INFINITY, exp: 0 };
        }
        if exp < -EXP_LIMIT {
            return WideFloat { mant: mm.signum() * 0.0, exp: 0 };
        }
        WideFloat { mant: mm, exp }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalize(x, 0)
    }

    /// Nearest `f64`; overflows to `±inf` and underflows to `±0`.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    /// Mantissa in `[0.5, 1)` and binary exponent.
    pub fn parts(self) -> (f64, i64) {
        (self.mant, self.exp)
    }

    pub fn from_parts(mant: f64, exp: i64) -> Self {
        Self::normalize(mant, exp)
    }

    fn special(self) -> bool {
        self.mant == 0.0 || !self.mant.is_finite()
    }

    /// True when the value is representable as a normal `f64` without rounding of the exponent.
    fn fits_f64(self) -> bool {
        self.special() || (-1000..=1000).contains(&self.exp)
    }

    fn log2_abs(self) -> f64 {
        self.mant.abs().log2() + self.exp as f64
    }
}

impl fmt::Debug for WideFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideFloat({})", self)
    }
}

impl fmt::Display for WideFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fits_f64() {
            return fmt::Display::fmt(&WideFloat::to_f64(*self), f);
        }
        let l10 = self.log2_abs() * std::f64::consts::LOG10_2;
        let dexp = l10.floor();
        let digits = 10f64.powf(l10 - dexp);
        let sign = if self.mant < 0.0 { "-" } else { "" };
        let prec = f.precision().unwrap_or(12);
        write!(f, "{}{:.*}e{}", sign, prec, digits, dexp as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWideError(String);

impl fmt::Display for ParseWideError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid wide float literal: {}", self.0)
    }
}

impl std::error::Error for ParseWideError {}

impl FromStr for WideFloat {
    type Err = ParseWideError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(x) = t.parse::<f64>() {
            if x.is_finite() && x != 0.0 || !t.contains(['e', 'E']) {
                return Ok(WideFloat::from_f64(x));
            }
        }
        let (m, e) = t.split_once(['e', 'E']).ok_or_else(|| ParseWideError(s.to_string()))?;
        let m: f64 = m.parse().map_err(|_| ParseWideError(s.to_string()))?;
        let e: i64 = e.parse().map_err(|_| ParseWideError(s.to_string()))?;
        let scale = WideFloat::from_f64(e as f64 * std::f64::consts::LOG2_10).exp2();
        Ok(WideFloat::from_f64(m) * scale)
    }
}

impl From<f64> for WideFloat {
    fn from(x: f64) -> Self {
        WideFloat::from_f64(x)
    }
}

impl PartialEq for WideFloat {
    fn eq(&self, other: &Self) -> bool {
        self.mant == other.mant && self.exp == other.exp
    }
}

impl PartialOrd for WideFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.mant.is_nan() || other.mant.is_nan() {
            return None;
        }
        if self.mant.is_infinite() || other.mant.is_infinite() {
            // finite mantissas are in (-1, 1), so this orders correctly
            return self.mant.partial_cmp(&other.mant);
        }
        let sa = self.mant.partial_cmp(&0.0).unwrap();
        let sb = other.mant.partial_cmp(&0.0).unwrap();
        if sa != sb {
            return Some(sa.cmp(&sb));
        }
        let mag = self.exp.cmp(&other.exp).then(self.mant.abs().partial_cmp(&other.mant.abs()).unwrap());
        Some(match sa {
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => mag,
            Ordering::Less => mag.reverse(),
        })
    }
}

impl Neg for WideFloat {
    type Output = Self;
    fn neg(self) -> Self {
        WideFloat { mant: -self.mant, exp: self.exp }
    }
}

impl Add for WideFloat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.special() || rhs.special() {
            if !self.mant.is_finite() || !rhs.mant.is_finite() {
                return WideFloat::from_f64(self.mant + rhs.mant);
            }
            if self.mant == 0.0 && rhs.mant == 0.0 {
                return WideFloat::from_f64(self.mant + rhs.mant);
            }
            return if self.mant == 0.0 { rhs } else { self };
        }
        let d = self.exp - rhs.exp;
        if d > 64 {
            return self;
        }
        if d < -64 {
            return rhs;
        }
        if d >= 0 {
            WideFloat::normalize(self.mant + rhs.mant * pow2(-d), self.exp)
        } else {
            WideFloat::normalize(self.mant * pow2(d) + rhs.mant, rhs.exp)
        }
    }
}

impl Sub for WideFloat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for WideFloat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.special() || rhs.special() {
            return WideFloat::from_f64(self.mant * rhs.mant);
        }
        WideFloat::normalize(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for WideFloat {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.special() || rhs.special() {
            return WideFloat::from_f64(self.mant / rhs.mant);
        }
        WideFloat::normalize(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Rem for WideFloat {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        if self.fits_f64() && rhs.fits_f64() {
            return WideFloat::from_f64(self.to_f64() % rhs.to_f64());
        }
        self - rhs * (self / rhs).trunc()
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for WideFloat {
            fn $m(&mut self, rhs: Self) { *self = *self $op rhs; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Sum for WideFloat {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(WideFloat::ZERO, |a, b| a + b)
    }
}

impl Zero for WideFloat {
    fn zero() -> Self {
        WideFloat::ZERO
    }
    fn is_zero(&self) -> bool {
        self.mant == 0.0
    }
}

impl One for WideFloat {
    fn one() -> Self {
        WideFloat::ONE
    }
}

impl Num for WideFloat {
    type FromStrRadixErr = ParseWideError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseWideError(format!("radix {radix} unsupported")));
        }
        s.parse()
    }
}

impl ToPrimitive for WideFloat {
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(&WideFloat::to_f64(*self))
    }
    fn to_u64(&self) -> Option<u64> {
        ToPrimitive::to_u64(&WideFloat::to_f64(*self))
    }
    fn to_f64(&self) -> Option<f64> {
        Some(WideFloat::to_f64(*self))
    }
}

impl NumCast for WideFloat {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(WideFloat::from_f64)
    }
}

impl WideFloat {
    fn via_f64(self, f: impl Fn(f64) -> f64) -> Self {
        WideFloat::from_f64(f(self.to_f64()))
    }
}

impl Float for WideFloat {
    fn nan() -> Self {
        WideFloat { mant: f64::NAN, exp: 0 }
    }
    fn infinity() -> Self {
        WideFloat { mant: f64::INFINITY, exp: 0 }
    }
    fn neg_infinity() -> Self {
        WideFloat { mant: f64::NEG_INFINITY, exp: 0 }
    }
    fn neg_zero() -> Self {
        WideFloat { mant: -0.0, exp: 0 }
    }
    fn min_value() -> Self {
        -Self::max_value()
    }
    fn min_positive_value() -> Self {
        WideFloat { mant: 0.5, exp: -EXP_LIMIT }
    }
    fn max_value() -> Self {
        WideFloat { mant: 1.0 - f64::EPSILON / 2.0, exp: EXP_LIMIT }
    }
    fn epsilon() -> Self {
        WideFloat::from_f64(f64::EPSILON)
    }
    fn is_nan(self) -> bool {
        self.mant.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.mant.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.mant.is_finite()
    }
    fn is_normal(self) -> bool {
        self.mant.is_finite() && self.mant != 0.0
    }
    fn classify(self) -> FpCategory {
        if self.mant.is_nan() {
            FpCategory::Nan
        } else if self.mant.is_infinite() {
            FpCategory::Infinite
        } else if self.mant == 0.0 {
            FpCategory::Zero
        } else {
            FpCategory::Normal
        }
    }
    fn floor(self) -> Self {
        if self.exp >= 53 {
            self
        } else {
            self.via_f64(f64::floor)
        }
    }
    fn ceil(self) -> Self {
        if self.exp >= 53 {
            self
        } else {
            self.via_f64(f64::ceil)
        }
    }
    fn round(self) -> Self {
        if self.exp >= 53 {
            self
        } else {
            self.via_f64(f64::round)
        }
    }
    fn trunc(self) -> Self {
        if self.exp >= 53 {
            self
        } else {
            self.via_f64(f64::trunc)
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        WideFloat { mant: self.mant.abs(), exp: self.exp }
    }
    fn signum(self) -> Self {
        WideFloat::from_f64(self.mant.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.mant.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.mant.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        WideFloat::ONE / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = WideFloat::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        if self.special() || n.special() {
            return WideFloat::from_f64(self.mant.powf(n.to_f64()));
        }
        if self.mant > 0.0 {
            return (n * self.ln()).exp();
        }
        if n.trunc() == n && n.abs() <= WideFloat::from_f64(i32::MAX as f64) {
            return self.powi(n.to_f64() as i32);
        }
        if n.trunc() == n {
            let mag = (n * self.abs().ln()).exp();
            let odd = n.exp < 53 && (n.to_f64() % 2.0).abs() == 1.0;
            return if odd { -mag } else { mag };
        }
        WideFloat::nan()
    }
    fn sqrt(self) -> Self {
        if self.special() || self.mant < 0.0 {
            return WideFloat::from_f64(self.mant.sqrt());
        }
        if self.exp % 2 == 0 {
            WideFloat::normalize(self.mant.sqrt(), self.exp / 2)
        } else {
            WideFloat::normalize((2.0 * self.mant).sqrt(), (self.exp - 1) / 2)
        }
    }
    fn exp(self) -> Self {
        if self.special() {
            return WideFloat::from_f64(self.mant.exp());
        }
        if self.exp > 60 {
            return if self.mant > 0.0 { WideFloat::infinity() } else { WideFloat::ZERO };
        }
        let x = self.to_f64();
        if x.abs() < 700.0 {
            return WideFloat::from_f64(x.exp());
        }
        let k = (x / std::f64::consts::LN_2).round();
        let r = (x - k * LN2_HI) - k * LN2_LO;
        WideFloat::normalize(r.exp(), k as i64)
    }
    fn exp2(self) -> Self {
        if self.special() {
            return WideFloat::from_f64(self.mant.exp2());
        }
        if self.exp > 60 {
            return if self.mant > 0.0 { WideFloat::infinity() } else { WideFloat::ZERO };
        }
        let x = self.to_f64();
        let k = x.floor();
        WideFloat::normalize((x - k).exp2(), k as i64)
    }
    fn ln(self) -> Self {
        if self.special() || self.mant < 0.0 {
            return WideFloat::from_f64(self.mant.ln());
        }
        let e = self.exp as f64;
        WideFloat::from_f64((self.mant.ln() + e * LN2_LO) + e * LN2_HI)
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        if self.special() || self.mant < 0.0 {
            return WideFloat::from_f64(self.mant.log2());
        }
        WideFloat::from_f64(self.log2_abs())
    }
    fn log10(self) -> Self {
        self.ln() / WideFloat::from_f64(std::f64::consts::LN_10)
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() {
            return other;
        }
        if other.is_nan() {
            return self;
        }
        if other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() {
            return other;
        }
        if other.is_nan() {
            return self;
        }
        if other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        (self - other).max(WideFloat::ZERO)
    }
    fn cbrt(self) -> Self {
        if self.fits_f64() {
            return self.via_f64(f64::cbrt);
        }
        let mag = (self.abs().ln() / WideFloat::from_f64(3.0)).exp();
        if self.mant < 0.0 {
            -mag
        } else {
            mag
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        self.via_f64(f64::sin)
    }
    fn cos(self) -> Self {
        self.via_f64(f64::cos)
    }
    fn tan(self) -> Self {
        self.via_f64(f64::tan)
    }
    fn asin(self) -> Self {
        self.via_f64(f64::asin)
    }
    fn acos(self) -> Self {
        self.via_f64(f64::acos)
    }
    fn atan(self) -> Self {
        self.via_f64(f64::atan)
    }
    fn atan2(self, other: Self) -> Self {
        WideFloat::from_f64(self.to_f64().atan2(other.to_f64()))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        if self.abs() < WideFloat::ONE {
            self.via_f64(f64::exp_m1)
        } else {
            self.exp() - WideFloat::ONE
        }
    }
    fn ln_1p(self) -> Self {
        if self.abs() < WideFloat::ONE {
            self.via_f64(f64::ln_1p)
        } else {
            (self + WideFloat::ONE).ln()
        }
    }
    fn sinh(self) -> Self {
        if self.fits_f64() && self.to_f64().abs() < 700.0 {
            return self.via_f64(f64::sinh);
        }
        (self.exp() - (-self).exp()) / WideFloat::from_f64(2.0)
    }
    fn cosh(self) -> Self {
        if self.fits_f64() && self.to_f64().abs() < 700.0 {
            return self.via_f64(f64::cosh);
        }
        (self.exp() + (-self).exp()) / WideFloat::from_f64(2.0)
    }
    fn tanh(self) -> Self {
        self.via_f64(f64::tanh)
    }
    fn asinh(self) -> Self {
        if self.fits_f64() {
            return self.via_f64(f64::asinh);
        }
        let mag = (self.abs() + (self * self + WideFloat::ONE).sqrt()).ln();
        if self.mant < 0.0 {
            -mag
        } else {
            mag
        }
    }
    fn acosh(self) -> Self {
        if self.fits_f64() {
            return self.via_f64(f64::acosh);
        }
        (self + (self * self - WideFloat::ONE).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        self.via_f64(f64::atanh)
    }
    /// Decodes the nearest `f64`; values outside the f64 range saturate.
    fn integer_decode(self) -> (u64, i16, i8) {
        self.to_f64().integer_decode()
    }
    fn to_degrees(self) -> Self {
        self * WideFloat::from_f64(180.0 / std::f64::consts::PI)
    }
    fn to_radians(self) -> Self {
        self * WideFloat::from_f64(std::f64::consts::PI / 180.0)
    }
}
