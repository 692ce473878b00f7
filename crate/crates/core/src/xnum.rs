//! Extended-range numbers for points exponentially close to the unit circle.
//!
//! [`XR`] and [`XC`] carry an `f64` (or complex) mantissa with an `i64`
//! binary exponent, so magnitudes like `exp(-15000)` stay representable.
//! Angles are kept as exact binary fractions of a full turn in
//! [`BigFloat`], and [`NearPt`] stores `z = exp(2πi t) (1 - d)` so that
//! `1 - z` and friends are formed without cancellation.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, TAU};
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expr::Scalar;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision for turn angles, in bits.
pub const DEFAULT_PRECISION_BITS: usize = 256;

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    if exp == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, exp - 1022)
}

fn ldexp(mut m: f64, mut e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// Real number `m * 2^e` with `|m|` in `[0.5, 1)` (or zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XR {
    m: f64,
    e: i64,
}

impl XR {
    pub const ZERO: XR = XR { m: 0.0, e: 0 };
    pub const ONE: XR = XR { m: 0.5, e: 1 };

    pub fn new(x: f64) -> XR {
        Self::norm(x, 0)
    }

    fn norm(m: f64, e: i64) -> XR {
        if m == 0.0 {
            return XR::ZERO;
        }
        if !m.is_finite() {
            return XR { m, e: 0 };
        }
        let (fm, fe) = frexp(m);
        XR { m: fm, e: e + fe }
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> XR {
        XR { m: 0.5, e: k + 1 }
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }

    pub fn exponent(self) -> i64 {
        self.e
    }

    pub fn ldexp(self, k: i64) -> XR {
        if self.m == 0.0 {
            self
        } else {
            XR { m: self.m, e: self.e + k }
        }
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.m, self.e)
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.m.is_finite()
    }

    pub fn neg(self) -> XR {
        XR { m: -self.m, e: self.e }
    }

    pub fn abs(self) -> XR {
        XR { m: self.m.abs(), e: self.e }
    }

    pub fn add(self, o: XR) -> XR {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let shift = small.e - big.e;
        if shift < -1100 {
            return big;
        }
        Self::norm(big.m + ldexp(small.m, shift), big.e)
    }

    pub fn sub(self, o: XR) -> XR {
        self.add(o.neg())
    }

    pub fn mul(self, o: XR) -> XR {
        Self::norm(self.m * o.m, self.e + o.e)
    }

    pub fn div(self, o: XR) -> XR {
        Self::norm(self.m / o.m, self.e - o.e)
    }

    pub fn scale(self, x: f64) -> XR {
        Self::norm(self.m * x, self.e)
    }

    pub fn sqrt(self) -> XR {
        if self.m <= 0.0 {
            return XR::norm(self.m.sqrt(), 0);
        }
        if self.e.rem_euclid(2) == 0 {
            Self::norm(self.m.sqrt(), self.e / 2)
        } else {
            Self::norm((2.0 * self.m).sqrt(), (self.e - 1) / 2)
        }
    }

    /// Natural logarithm, which always fits in an `f64`.
    pub fn ln(self) -> f64 {
        self.m.ln() + self.e as f64 * LN_2
    }

    /// `exp(x)` for any finite `x`.
    pub fn exp(x: f64) -> XR {
        if !x.is_finite() {
            return XR { m: x.exp(), e: 0 };
        }
        let k = (x / LN_2).floor();
        let r = x - k * LN_2;
        Self::norm(r.exp(), k as i64)
    }

    pub fn powf(self, p: f64) -> XR {
        if self.m == 0.0 {
            return if p > 0.0 { XR::ZERO } else { XR::new(f64::INFINITY) };
        }
        XR::exp(p * self.ln())
    }

    pub fn max(self, o: XR) -> XR {
        if self.partial_cmp(&o) == Some(Ordering::Less) {
            o
        } else {
            self
        }
    }

    pub fn min(self, o: XR) -> XR {
        if self.partial_cmp(&o) == Some(Ordering::Greater) {
            o
        } else {
            self
        }
    }

    /// Converts to an arbitrary-precision float with `p` bits.
    pub fn to_big(self, p: usize) -> BigFloat {
        if self.m == 0.0 {
            return BigFloat::from_f64(0.0, p);
        }
        let word = (self.m.abs() * 2f64.powi(64)) as u64;
        let sign = if self.m < 0.0 { Sign::Neg } else { Sign::Pos };
        let mut b = BigFloat::from_words(&[word], sign, self.e as i32);
        let _ = b.set_precision(p.max(64), RM);
        b
    }

    /// Rounds an arbitrary-precision float to extended double precision.
    pub fn from_big(b: &BigFloat) -> XR {
        if b.is_zero() {
            return XR::ZERO;
        }
        match b.as_raw_parts() {
            Some((words, _, sign, e, _)) => {
                let n = words.len();
                let hi = words[n - 1] as f64 / 2f64.powi(64);
                let lo = if n > 1 { words[n - 2] as f64 / 2f64.powi(128) } else { 0.0 };
                let m = hi + lo;
                let m = if sign == Sign::Neg { -m } else { m };
                Self::norm(m, e as i64)
            }
            None => XR::new(f64::NAN),
        }
    }

    /// Decimal rendering with about 17 significant digits.
    pub fn to_decimal(self) -> String {
        if self.m == 0.0 {
            return "0".into();
        }
        if !self.m.is_finite() {
            return format!("{}", self.m);
        }
        if self.e.abs() < 990 {
            return format!("{:.16e}", self.to_f64());
        }
        // Exact binary-to-decimal conversion, then rounding to 17 digits.
        let text = Consts::new()
            .ok()
            .and_then(|mut cc| self.abs().to_big(128).format(Radix::Dec, RM, &mut cc).ok())
            .unwrap_or_default();
        let (mant, exp) = text.split_once(['e', 'E']).unwrap_or((&text, "0"));
        let (mut mant, mut k) = (mant.parse::<f64>().unwrap_or(f64::NAN), exp.parse::<i64>().unwrap_or(0));
        if format!("{mant:.16}").starts_with("10") {
            mant /= 10.0;
            k += 1;
        }
        let sign = if self.m < 0.0 { "-" } else { "" };
        format!("{sign}{mant:.16}e{k}")
    }

    /// Parses decimal text written by [`XR::to_decimal`] or any plain float.
    pub fn parse(s: &str) -> Result<XR> {
        let s = s.trim();
        if let Ok(x) = s.parse::<f64>() {
            if x != 0.0 && x.is_finite() && x.abs() > 1e-300 && x.abs() < 1e300 {
                return Ok(XR::new(x));
            }
            if x == 0.0 && !s.contains(['e', 'E']) {
                return Ok(XR::ZERO);
            }
        }
        let (mant, exp) = s.split_once(['e', 'E']).unwrap_or((s, "0"));
        if mant.parse::<f64>().is_err() || exp.parse::<i64>().is_err() {
            return Err(Error::domain(format!("bad extended number {s:?}")));
        }
        let mut cc = Consts::new().map_err(|e| Error::numerical(format!("constant cache: {e:?}")))?;
        let b = BigFloat::parse(s, Radix::Dec, 128, RM, &mut cc);
        if b.is_nan() || b.is_inf() {
            return Err(Error::domain(format!("bad extended number {s:?}")));
        }
        Ok(XR::from_big(&b))
    }
}

impl PartialOrd for XR {
    fn partial_cmp(&self, o: &XR) -> Option<Ordering> {
        if !self.m.is_finite() || !o.m.is_finite() {
            return ldexp(self.m, 0).partial_cmp(&ldexp(o.m, 0));
        }
        let sa = self.m.signum() * (self.m != 0.0) as i32 as f64;
        let sb = o.m.signum() * (o.m != 0.0) as i32 as f64;
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        if sa == 0.0 {
            return Some(Ordering::Equal);
        }
        let mag = match self.e.cmp(&o.e) {
            Ordering::Equal => self.m.abs().partial_cmp(&o.m.abs())?,
            c => c,
        };
        Some(if sa > 0.0 { mag } else { mag.reverse() })
    }
}

impl fmt::Display for XR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl serde::Serialize for XR {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal())
    }
}

impl<'de> serde::Deserialize<'de> for XR {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        XR::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Complex number `m * 2^e` with `max(|Re m|, |Im m|)` in `[0.5, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XC {
    m: C64,
    e: i64,
}

impl XC {
    pub const ZERO: XC = XC { m: C64 { re: 0.0, im: 0.0 }, e: 0 };

    pub fn new(c: C64) -> XC {
        Self::norm(c, 0)
    }

    pub fn from_xr(x: XR) -> XC {
        XC { m: C64::new(x.m, 0.0), e: x.e }
    }

    /// `x + i y`.
    pub fn from_parts(x: XR, y: XR) -> XC {
        Self::from_xr(x).add(&Self::from_xr(y).mul_c(C64::i()))
    }

    fn norm(m: C64, e: i64) -> XC {
        let s = m.re.abs().max(m.im.abs());
        if s == 0.0 {
            return XC::ZERO;
        }
        if !s.is_finite() || !m.re.is_finite() || !m.im.is_finite() {
            return XC { m: C64::new(f64::NAN, f64::NAN), e: 0 };
        }
        let (_, fe) = frexp(s);
        XC { m: C64::new(ldexp(m.re, -fe), ldexp(m.im, -fe)), e: e + fe }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(ldexp(self.m.re, self.e), ldexp(self.m.im, self.e))
    }

    pub fn re(&self) -> XR {
        XR::norm(self.m.re, self.e)
    }

    pub fn im(&self) -> XR {
        XR::norm(self.m.im, self.e)
    }

    pub fn norm_sqr(&self) -> XR {
        XR::norm(self.m.norm_sqr(), 2 * self.e)
    }

    pub fn abs(&self) -> XR {
        XR::norm(self.m.norm(), self.e)
    }

    pub fn arg(&self) -> f64 {
        self.m.arg()
    }

    pub fn conj(&self) -> XC {
        XC { m: self.m.conj(), e: self.e }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.m.re.is_finite() && self.m.im.is_finite()
    }

    pub fn neg(&self) -> XC {
        XC { m: -self.m, e: self.e }
    }

    pub fn add(&self, o: &XC) -> XC {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let shift = small.e - big.e;
        if shift < -1100 {
            return *big;
        }
        let sm = C64::new(ldexp(small.m.re, shift), ldexp(small.m.im, shift));
        Self::norm(big.m + sm, big.e)
    }

    pub fn sub(&self, o: &XC) -> XC {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &XC) -> XC {
        Self::norm(self.m * o.m, self.e + o.e)
    }

    pub fn mul_c(&self, c: C64) -> XC {
        Self::norm(self.m * c, self.e)
    }

    pub fn mul_r(&self, x: XR) -> XC {
        Self::norm(self.m * x.m, self.e + x.e)
    }

    pub fn div(&self, o: &XC) -> XC {
        Self::norm(self.m / o.m, self.e - o.e)
    }

    /// Principal logarithm; the result is always of moderate size.
    pub fn ln(&self) -> XC {
        let m = self.m.norm();
        XC::new(C64::new(m.ln() + self.e as f64 * LN_2, self.m.arg()))
    }

    pub fn exp(&self) -> XC {
        let x = self.to_c64();
        if !x.re.is_finite() || !x.im.is_finite() {
            return XC { m: C64::new(f64::NAN, f64::NAN), e: 0 };
        }
        let k = (x.re / LN_2).floor();
        let r = x.re - k * LN_2;
        Self::norm(C64::from_polar(r.exp(), x.im), k as i64)
    }

    pub fn sqrt(&self) -> XC {
        if self.e.rem_euclid(2) == 0 {
            Self::norm(self.m.sqrt(), self.e / 2)
        } else {
            Self::norm((self.m * 2.0).sqrt(), (self.e - 1) / 2)
        }
    }

    pub fn powi(&self, n: i32) -> XC {
        if n < 0 {
            return XC::new(C64::new(1.0, 0.0)).div(&self.powi(-n));
        }
        let mut acc = XC::new(C64::new(1.0, 0.0));
        let mut base = *self;
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn powf(&self, p: f64) -> XC {
        if self.is_zero() {
            return if p > 0.0 { XC::ZERO } else { XC::new(C64::new(f64::INFINITY, 0.0)) };
        }
        self.ln().mul_c(C64::new(p, 0.0)).exp()
    }
}

impl From<C64> for XC {
    fn from(c: C64) -> XC {
        XC::new(c)
    }
}

/// A turn fraction as an arbitrary-precision float.
pub fn turn(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

/// Signed difference `a - b` of two turn angles, reduced to `(-1/2, 1/2]`.
pub fn turn_diff(a: &BigFloat, b: &BigFloat, p: usize) -> XR {
    let d = a.sub(b, p, RM);
    let half = BigFloat::from_f64(0.5, p);
    let k = d.add(&half, p, RM).floor();
    XR::from_big(&d.sub(&k, p, RM))
}

/// Reduces a turn angle into `[0, 1)`.
pub fn turn_reduce(a: &BigFloat, p: usize) -> BigFloat {
    a.sub(&a.floor(), p, RM)
}

pub fn turn_add(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.add(b, p, RM)
}

/// Turn fraction rounded to `f64`.
pub fn turn_f64(a: &BigFloat, p: usize) -> f64 {
    XR::from_big(&turn_reduce(a, p)).to_f64()
}

pub fn turn_to_string(a: &BigFloat) -> Result<String> {
    let mut cc = Consts::new().map_err(|e| Error::numerical(format!("constant cache: {e:?}")))?;
    if a.is_zero() {
        return Ok("0".into());
    }
    a.format(Radix::Dec, RM, &mut cc)
        .map_err(|e| Error::numerical(format!("formatting angle: {e:?}")))
}

pub fn turn_parse(s: &str, p: usize) -> Result<BigFloat> {
    let mut cc = Consts::new().map_err(|e| Error::numerical(format!("constant cache: {e:?}")))?;
    let b = BigFloat::parse(s.trim(), Radix::Dec, p, RM, &mut cc);
    if b.is_nan() {
        return Err(Error::domain(format!("bad angle {s:?}")));
    }
    Ok(b)
}

/// `1 - exp(2πi x)` for a turn fraction `x` given in extended precision.
pub fn one_minus_cis(x: XR) -> XC {
    let g = x.scale(TAU);
    if g.e < -20 {
        let gf = g.to_f64();
        let corr = C64::new(1.0 - gf * gf / 6.0, gf / 2.0);
        XC::from_xr(g).mul_c(C64::new(0.0, -1.0) * corr)
    } else {
        let gf = g.to_f64();
        XC::new(C64::new(0.0, -2.0 * (gf / 2.0).sin()) * C64::from_polar(1.0, gf / 2.0))
    }
}

/// Point `exp(2πi t) (1 - d)` of the disc, with `d` possibly tiny.
#[derive(Clone, Debug)]
pub struct NearPt {
    pub t: BigFloat,
    pub d: XC,
    pub p: usize,
}

impl NearPt {
    pub fn new(t: BigFloat, d: XC, p: usize) -> NearPt {
        NearPt { t, d, p }
    }

    /// Radial point `(1 - gap) exp(2πi t)`.
    pub fn radial(t: BigFloat, gap: XR, p: usize) -> NearPt {
        NearPt { t, d: XC::from_xr(gap), p }
    }

    /// `1 - z exp(-2πi c)` without cancellation.
    pub fn rel_to(&self, c: &BigFloat) -> XC {
        let g = turn_diff(&self.t, c, self.p);
        let rot = C64::from_polar(1.0, TAU * g.to_f64());
        one_minus_cis(g).add(&self.d.mul_c(rot))
    }

    /// `1 - |z|^2 = 2 Re d - |d|^2`.
    pub fn one_minus_abs2(&self) -> XR {
        self.d.re().scale(2.0).sub(self.d.norm_sqr())
    }

    pub fn value(&self) -> XC {
        let th = TAU * turn_f64(&self.t, self.p);
        XC::new(C64::new(1.0, 0.0)).sub(&self.d).mul_c(C64::from_polar(1.0, th))
    }

    pub fn to_c64(&self) -> C64 {
        self.value().to_c64()
    }

    pub fn neg(&self) -> NearPt {
        let half = BigFloat::from_f64(0.5, self.p);
        NearPt { t: turn_reduce(&self.t.add(&half, self.p, RM), self.p), d: self.d, p: self.p }
    }
}

/// Scalar domain for evaluating expressions at [`NearPt`] points.
#[derive(Clone, Debug)]
pub enum LNum {
    Near(Box<NearPt>),
    Val(XC),
}

impl LNum {
    pub fn near(z: NearPt) -> LNum {
        LNum::Near(Box::new(z))
    }

    pub fn to_xc(&self) -> XC {
        match self {
            LNum::Near(z) => z.value(),
            LNum::Val(v) => *v,
        }
    }

    /// Turn angle of a unimodular constant, if this is one.
    fn unimodular(&self) -> Option<C64> {
        match self {
            LNum::Val(v) if v.e.abs() <= 2 => {
                let c = v.to_c64();
                ((c.norm_sqr() - 1.0).abs() <= 4e-16).then_some(c)
            }
            _ => None,
        }
    }

    /// `c - z` for unimodular `c`.
    fn const_minus(c: C64, z: &NearPt) -> XC {
        let phi = c.arg() / TAU;
        let tc = BigFloat::from_f64(phi, z.p);
        z.rel_to(&tc).mul_c(c)
    }
}

impl Scalar for LNum {
    fn lift(c: C64) -> Self {
        LNum::Val(XC::new(c))
    }

    fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (LNum::Near(z), LNum::Val(_)) if o.unimodular().is_some() => {
                LNum::Val(Self::const_minus(o.unimodular().unwrap(), &z.neg()))
            }
            (LNum::Val(_), LNum::Near(z)) if self.unimodular().is_some() => {
                LNum::Val(Self::const_minus(self.unimodular().unwrap(), &z.neg()))
            }
            _ => LNum::Val(self.to_xc().add(&o.to_xc())),
        }
    }

    fn sub(&self, o: &Self) -> Self {
        match (self, o) {
            (LNum::Val(_), LNum::Near(z)) if self.unimodular().is_some() => {
                LNum::Val(Self::const_minus(self.unimodular().unwrap(), z))
            }
            (LNum::Near(z), LNum::Val(_)) if o.unimodular().is_some() => {
                LNum::Val(Self::const_minus(o.unimodular().unwrap(), z).neg())
            }
            _ => LNum::Val(self.to_xc().sub(&o.to_xc())),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (LNum::Near(z), LNum::Val(v)) | (LNum::Val(v), LNum::Near(z)) => {
                let c = v.to_c64();
                if c == C64::new(1.0, 0.0) {
                    return LNum::Near(z.clone());
                }
                if c == C64::new(-1.0, 0.0) {
                    return LNum::near(z.neg());
                }
                LNum::Val(z.value().mul(v))
            }
            _ => LNum::Val(self.to_xc().mul(&o.to_xc())),
        }
    }

    fn div(&self, o: &Self) -> Self {
        LNum::Val(self.to_xc().div(&o.to_xc()))
    }

    fn neg(&self) -> Self {
        match self {
            LNum::Near(z) => LNum::near(z.neg()),
            LNum::Val(v) => LNum::Val(v.neg()),
        }
    }

    fn powi(&self, n: i32) -> Self {
        LNum::Val(self.to_xc().powi(n))
    }

    fn powf(&self, p: f64) -> Self {
        LNum::Val(self.to_xc().powf(p))
    }

    fn exp(&self) -> Self {
        LNum::Val(self.to_xc().exp())
    }

    fn ln(&self) -> Self {
        LNum::Val(self.to_xc().ln())
    }

    fn sqrt(&self) -> Self {
        LNum::Val(self.to_xc().sqrt())
    }

    fn is_zero(&self) -> bool {
        match self {
            LNum::Near(z) => z.d == XC::new(C64::new(1.0, 0.0)),
            LNum::Val(v) => v.is_zero(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            LNum::Near(z) => z.d.is_finite(),
            LNum::Val(v) => v.is_finite(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xr_round_trip() {
        let x = XR::exp(-15000.0);
        assert!((x.ln() + 15000.0).abs() < 1e-9);
        let y = XR::parse(&x.to_decimal()).unwrap();
        assert!((y.div(x).to_f64() - 1.0).abs() < 1e-13);
        let b = x.to_big(256);
        assert_eq!(XR::from_big(&b), x);
        assert!(XR::new(0.3) < XR::new(0.4));
        assert!(XR::exp(-2000.0) < XR::exp(-1000.0));
        assert!(XR::new(-1.0) < XR::exp(-1000.0));
    }

    #[test]
    fn near_one_minus_z() {
        let p = 256;
        let gap = XR::exp(-3000.0);
        let z = LNum::near(NearPt::radial(turn(0.0, p), gap, p));
        let one = LNum::lift(C64::new(1.0, 0.0));
        let d = one.sub(&z).to_xc();
        assert!((d.re().div(gap).to_f64() - 1.0).abs() < 1e-14);
        let d2 = z.neg().add(&one).to_xc();
        assert!((d2.re().div(gap).to_f64() - 1.0).abs() < 1e-14);
        // tiny angular offset
        let off = XR::exp(-3000.0).to_big(p);
        let z = NearPt::radial(off, XR::ZERO, p);
        let d = z.rel_to(&turn(0.0, p));
        assert!((d.im().div(XR::exp(-3000.0)).to_f64() + TAU).abs() < 1e-12);
    }

    #[test]
    fn turn_strings() {
        let p = 256;
        let t = XR::exp(-5000.0).to_big(p);
        let s = turn_to_string(&t).unwrap();
        let back = turn_parse(&s, p).unwrap();
        assert!((turn_diff(&back, &t, p).div(XR::exp(-5000.0)).to_f64()).abs() < 1e-15);
    }
}
