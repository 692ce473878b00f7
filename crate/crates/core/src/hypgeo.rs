//! Hyperbolic geometry of the unit disc: Möbius maps, distance, midpoints,
//! boundary arcs and their Carleson boxes.
//!
//! Arc lengths are fractions of the whole circle, so the full circle has
//! length 1.

use std::f64::consts::{PI, TAU};
use std::sync;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::{Func, Holo};

/// A point of the open disc stored in polar form with an explicit gap
/// `ε = 1 - |z|`, so that `1 - |z|²` can be formed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscPoint {
    pub theta: f64,
    pub gap: f64,
}

impl DiscPoint {
    pub fn polar(theta: f64, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= 1.0) || !theta.is_finite() {
            return Err(Error::domain(format!("gap {gap} outside (0, 1]")));
        }
        Ok(DiscPoint { theta: theta.rem_euclid(TAU), gap })
    }

    pub fn from_complex(z: C64) -> Result<Self> {
        let r = z.norm();
        if r >= 1.0 || !r.is_finite() {
            return Err(Error::domain(format!("{z} is not inside the unit disc")));
        }
        let theta = if r == 0.0 { 0.0 } else { z.arg() };
        Self::polar(theta, 1.0 - r)
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::from_complex(C64::new(x, 0.0))
    }

    pub fn modulus(&self) -> f64 {
        1.0 - self.gap
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.modulus(), self.theta)
    }

    /// `1 - |z|²`.
    pub fn one_minus_abs2(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }
}

/// `m(z) = rot·(a - z)/(1 - ā z)` with `|rot| = 1` and `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusMap {
    pub a: C64,
    pub rot: C64,
}

impl MobiusMap {
    /// The involution `φ_a`.
    pub fn phi(a: C64) -> Self {
        MobiusMap { a, rot: C64::new(1.0, 0.0) }
    }

    /// `σ_a(z) = (z - a)/(1 - ā z)`.
    pub fn sigma(a: C64) -> Self {
        MobiusMap { a, rot: C64::new(-1.0, 0.0) }
    }

    pub fn identity() -> Self {
        Self::sigma(C64::new(0.0, 0.0))
    }

    pub fn apply(&self, z: C64) -> C64 {
        self.rot * (self.a - z) / (1.0 - self.a.conj() * z)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let d = 1.0 - self.a.conj() * z;
        self.rot * (self.a.norm_sqr() - 1.0) / (d * d)
    }

    /// `1 - |m(z)|²` computed from `1 - |a|²` and `1 - |z|²`.
    pub fn one_minus_abs2(&self, z: C64) -> f64 {
        (1.0 - self.a.norm_sqr()) * (1.0 - z.norm_sqr()) / (1.0 - self.a.conj() * z).norm_sqr()
    }
}

/// Pseudo-hyperbolic distance `|φ_a(z)|` and `1 - |φ_a(z)|²`.
fn pseudo(a: &DiscPoint, z: &DiscPoint) -> (f64, f64) {
    let (av, zv) = (a.value(), z.value());
    let den = (1.0 - av.conj() * zv).norm();
    let rho = (av - zv).norm() / den;
    let q = a.one_minus_abs2() * z.one_minus_abs2() / (den * den);
    (rho, q)
}

/// Hyperbolic distance `½ log((1+ρ)/(1-ρ))`, `ρ = |φ_a(z)|`.
pub fn hyp_dist(a: &DiscPoint, z: &DiscPoint) -> f64 {
    let (rho, q) = pseudo(a, z);
    if rho < 0.5 {
        rho.atanh()
    } else {
        rho.ln_1p() - 0.5 * q.ln()
    }
}

/// Hyperbolic midpoint of `[0, w]`.
pub fn midpoint_from_origin(w: &DiscPoint) -> Result<DiscPoint> {
    if w.gap >= 1.0 {
        return Err(Error::domain("midpoint needs w != 0"));
    }
    let s = w.one_minus_abs2().sqrt();
    DiscPoint::polar(w.theta, (s + w.gap) / (1.0 + s))
}

/// A closed boundary arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub center: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(center: f64, len: f64) -> Result<Self> {
        if !(len > 0.0 && len <= 1.0) || !center.is_finite() {
            return Err(Error::domain(format!("arc length {len} outside (0, 1]")));
        }
        Ok(Arc { center: center.rem_euclid(TAU), len })
    }

    pub fn full() -> Self {
        Arc { center: 0.0, len: 1.0 }
    }

    /// Half opening angle in radians.
    pub fn half_angle(&self) -> f64 {
        PI * self.len
    }
}

/// The arc whose box has `w` as the point closest to the origin.
pub fn arc_of(w: &DiscPoint) -> Result<Arc> {
    if w.gap >= 1.0 {
        return Err(Error::domain("arc_of needs w != 0"));
    }
    let theta = w.one_minus_abs2().atan2(2.0 * w.modulus());
    Arc::new(w.theta, theta / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoxShape {
    /// Disc `|z - c| ≤ ρ` orthogonal to the unit circle.
    Circle { c: [f64; 2], rho: f64 },
    /// Closed half-disc bounded by a diameter.
    HalfPlane,
    /// Complement of the open box over the opposite arc.
    Complement,
    Full,
}

/// Carleson box `S(I)`: closed hyperbolic half-plane resting on the arc `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicBox {
    pub arc: Arc,
    pub shape: BoxShape,
}

impl GeodesicBox {
    pub fn of(arc: Arc) -> Self {
        let shape = if arc.len >= 1.0 {
            BoxShape::Full
        } else if arc.len == 0.5 {
            BoxShape::HalfPlane
        } else if arc.len > 0.5 {
            BoxShape::Complement
        } else {
            let t = arc.half_angle();
            let c = C64::from_polar(1.0 / t.cos(), arc.center);
            BoxShape::Circle { c: [c.re, c.im], rho: t.tan() }
        };
        GeodesicBox { arc, shape }
    }

    /// Membership by the inequality `2 Re(z e^{-iθc}) ≥ cos(πℓ)(1+|z|²)`,
    /// rearranged in terms of the gap and the angular offset so that nothing
    /// cancels near the boundary.
    pub fn contains(&self, z: &DiscPoint) -> bool {
        if matches!(self.shape, BoxShape::Full) {
            return true;
        }
        let phi = z.theta - self.arc.center;
        let a = 2.0 * (0.5 * phi).sin().powi(2);
        let b = 2.0 * (0.5 * self.arc.half_angle()).sin().powi(2);
        let r = z.modulus();
        // Relative slack of a few ulps so points on the geodesic (the apex in
        // particular) count as inside.
        let (lhs, rhs) = (b * (1.0 + r * r), 2.0 * a * r + z.gap * z.gap);
        lhs >= rhs - 8.0 * f64::EPSILON * lhs
    }

    /// Euclidean distance from the origin to the box.
    pub fn distance_from_origin(&self) -> f64 {
        if self.arc.len >= 0.5 {
            0.0
        } else {
            let t = self.arc.half_angle();
            (1.0 - t.sin()) / t.cos()
        }
    }

    /// Parameters of the reference map from the half-disc `{|ζ|<1, Re ζ ≥ 0}`
    /// onto the box: `ψ(ζ) = e^{iθc}(ζ + a)/(1 + aζ)` with `η = 1 - a`.
    pub fn reference_eta(&self) -> f64 {
        eta_of_len(self.arc.len)
    }
}

/// `η = 1 - a` where `a = (1 - sin πℓ)/cos πℓ` is the signed distance of the
/// box apex from the origin.
pub fn eta_of_len(len: f64) -> f64 {
    let x = PI * len;
    if len < 1e-5 {
        x * (1.0 - x / 2.0 + x * x / 3.0)
    } else if len < 0.5 {
        // (sin x - (1 - cos x)) / cos x
        (x.sin() - 2.0 * (0.5 * x).sin().powi(2)) / x.cos()
    } else {
        let k = 1.0 / x.tan();
        1.0 - k / (1.0 + (1.0 + k * k).sqrt())
    }
}

pub fn box_of(arc: Arc) -> GeodesicBox {
    GeodesicBox::of(arc)
}

pub fn box_contains(b: &GeodesicBox, z: &DiscPoint) -> bool {
    b.contains(z)
}

/// `log(e/(1-|z|²))`, comparable to `1 + δ(0, z)`.
pub fn log_distance_proxy(z: &DiscPoint) -> f64 {
    1.0 - z.one_minus_abs2().ln()
}

/// Hyperbolic translate `f_a(z) = f(φ_a(z)) - f(a)`.
pub struct Translate {
    f: Func,
    m: MobiusMap,
    fa: C64,
}

impl Holo for Translate {
    fn value(&self, z: C64) -> Result<C64> {
        Ok(self.f.value(self.m.apply(z))? - self.fa)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        Ok(self.f.deriv(self.m.apply(z))? * self.m.derivative(z))
    }
    fn label(&self) -> String {
        format!("translate({}, {})", self.f.label(), self.m.a)
    }
}

pub fn translate(f: Func, a: &DiscPoint) -> Result<Func> {
    let av = a.value();
    let fa = f.value(av)?;
    Ok(sync::Arc::new(Translate { f, m: MobiusMap::phi(av), fa }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> DiscPoint {
        DiscPoint::real(x).unwrap()
    }

    #[test]
    fn distances() {
        assert_eq!(hyp_dist(&p(0.0), &p(0.0)), 0.0);
        assert!((hyp_dist(&p(0.0), &p(0.5)) - 0.5493061443340549).abs() < 1e-12);
        assert!((hyp_dist(&p(0.5), &p(0.8)) - 0.5493061443340549).abs() < 1e-12);
    }

    #[test]
    fn midpoints() {
        let m = midpoint_from_origin(&p(0.8)).unwrap();
        assert!((m.modulus() - 0.5).abs() < 1e-15);
        let m = midpoint_from_origin(&p(0.9)).unwrap();
        assert!((m.modulus() - 0.9 / (1.0 + 0.19f64.sqrt())).abs() < 1e-15);
        assert!(midpoint_from_origin(&p(0.0)).is_err());
    }

    #[test]
    fn arcs() {
        let a = arc_of(&p(0.6)).unwrap();
        assert!((a.half_angle() - (1.2f64 / 1.36).acos()).abs() < 1e-14);
        assert!((a.len - 0.155958).abs() < 1e-6);
        assert!(arc_of(&p(0.0)).is_err());
    }

    #[test]
    fn boxes() {
        let w = p(0.6);
        let b = box_of(arc_of(&w).unwrap());
        assert!(b.contains(&w));
        assert!(!b.contains(&p(0.0)));
        assert!((b.distance_from_origin() - 0.6).abs() < 1e-14);
        let full = box_of(Arc::full());
        assert!(full.contains(&p(0.0)) && full.contains(&DiscPoint::polar(2.0, 1e-9).unwrap()));
    }

    #[test]
    fn eta_branches_agree() {
        for len in [1e-5, 0.1, 0.3, 0.49, 0.5, 0.51, 0.9] {
            let b = box_of(Arc::new(0.0, len).unwrap());
            let a = if len < 0.5 { b.distance_from_origin() } else { 1.0 - eta_of_len(len) };
            assert!((1.0 - a - eta_of_len(len)).abs() < 1e-12, "{len}");
        }
        let x = PI * 1e-5;
        let exact = (x.sin() - 2.0 * (0.5 * x).sin().powi(2)) / x.cos();
        assert!((eta_of_len(1e-5) - exact).abs() / exact < 1e-12);
    }
}
