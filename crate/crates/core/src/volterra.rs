//! Generalized Volterra operators, composition semigroups and probes of
//! strong continuity and operator boundedness.
//!
//! Everything here is a probe: finite families and finite grids give
//! evidence, never a decision.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::func::{ExprFn, Func, Holo};
use crate::quad::segment_integral;
use crate::semigroup::{flow_point, FlowConfig, Generator};
use crate::spaces::{bloch_seminorm, bloch_vanishing, bmoa_seminorm, bmoa_vanishing, SeminormReport, Space, SpaceConfig, Weight};

const ZERO: C64 = C64::new(0.0, 0.0);

pub const PROBE_MARKER: &str = "probe, not proof";

/// `T_g f(z) = ∫_0^z f g' dζ`.
pub struct Volterra {
    g: Func,
    f: Func,
}

impl Holo for Volterra {
    fn value(&self, z: C64) -> Result<C64> {
        segment_integral(&|w| self.deriv(w), ZERO, z, 1e-12)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        Ok(self.f.value(z)? * self.g.deriv(z)?)
    }
    fn label(&self) -> String {
        format!("T[{}]({})", self.g.label(), self.f.label())
    }
}

pub fn volterra_apply(g: Func, f: Func) -> Func {
    Arc::new(Volterra { g, f })
}

/// `C_t f = f ∘ φ_t`.
pub struct Compose {
    gen: Arc<Generator>,
    t: f64,
    f: Func,
    cfg: FlowConfig,
}

impl Holo for Compose {
    fn value(&self, z: C64) -> Result<C64> {
        if self.t == 0.0 {
            return self.f.value(z);
        }
        self.f.value(flow_point(&self.gen, z, self.t, &self.cfg)?.0)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        if self.t == 0.0 {
            return self.f.deriv(z);
        }
        let (w, j) = flow_point(&self.gen, z, self.t, &self.cfg)?;
        Ok(self.f.deriv(w)? * j)
    }
    fn label(&self) -> String {
        format!("C[{}; t={}]({})", self.gen.label(), self.t, self.f.label())
    }
}

pub fn compose_apply(gen: Arc<Generator>, t: f64, f: Func, cfg: &FlowConfig) -> Result<Func> {
    if !(t >= 0.0) {
        return Err(crate::Error::domain("composition time must be nonnegative"));
    }
    Ok(Arc::new(Compose { gen, t, f, cfg: *cfg }))
}

/// `a - b` as a handle.
struct Difference(Func, Func);

impl Holo for Difference {
    fn value(&self, z: C64) -> Result<C64> {
        Ok(self.0.value(z)? - self.1.value(z)?)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        Ok(self.0.deriv(z)? - self.1.deriv(z)?)
    }
    fn label(&self) -> String {
        format!("{} - {}", self.0.label(), self.1.label())
    }
}

pub fn seminorm(f: &dyn Holo, space: Space, w: &Weight, cfg: &SpaceConfig) -> Result<SeminormReport> {
    match space {
        Space::Bloch => bloch_seminorm(f, w, cfg),
        Space::Bmoa => bmoa_seminorm(f, w, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decays,
    BoundedBelow,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub space: Space,
    pub times: Vec<f64>,
    /// `‖C_t f - f‖` for each time.
    pub values: Vec<f64>,
    pub trend: Trend,
    /// Smallest value over the times.
    pub floor: f64,
    pub reports: Vec<SeminormReport>,
    pub marker: &'static str,
}

fn trend(times: &[f64], values: &[f64]) -> Trend {
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else { return Trend::Inconclusive };
    let (v0, v1) = (values[0], values[values.len() - 1]);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if times.len() >= 2 && v1 <= v0 * (t1 / t0).sqrt() {
        Trend::Decays
    } else if lo > 0.0 && lo >= 0.5 * hi {
        Trend::BoundedBelow
    } else {
        Trend::Inconclusive
    }
}

/// `‖C_t f - f‖_X` along decreasing times.
pub fn continuity_probe(
    gen: Arc<Generator>,
    f: Func,
    times: &[f64],
    space: Space,
    flow: &FlowConfig,
    cfg: &SpaceConfig,
) -> Result<ContinuityReport> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] >= w[0]) {
        return Err(crate::Error::domain("times must be positive and strictly decreasing"));
    }
    let mut reports = Vec::with_capacity(times.len());
    for &t in times {
        let d = Difference(compose_apply(gen.clone(), t, f.clone(), flow)?, f.clone());
        reports.push(seminorm(&d, space, &Weight::One, cfg)?);
    }
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    Ok(ContinuityReport {
        space,
        times: times.to_vec(),
        trend: trend(times, &values),
        floor: values.iter().copied().fold(f64::INFINITY, f64::min),
        values,
        reports,
        marker: PROBE_MARKER,
    })
}

/// Function with derivative `G f'` and value 0 at the origin.
struct CoreImage {
    gen: Arc<Generator>,
    f: Func,
}

impl Holo for CoreImage {
    fn value(&self, z: C64) -> Result<C64> {
        segment_integral(&|w| self.deriv(w), ZERO, z, 1e-12)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        Ok(self.gen.eval(z)? * self.f.deriv(z)?)
    }
    fn label(&self) -> String {
        format!("core({}, {})", self.gen.label(), self.f.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreReport {
    pub space: Space,
    pub seminorm: SeminormReport,
    pub verdict: crate::quad::LimitTag,
    /// The function with derivative `G f'` has a finite seminorm.
    pub in_core: bool,
}

/// Derivative-level test of `G f' ∈ X`.
pub fn dense_core_test(gen: Arc<Generator>, f: Func, space: Space, cfg: &SpaceConfig) -> Result<CoreReport> {
    let h = CoreImage { gen, f };
    let seminorm = seminorm(&h, space, &Weight::One, cfg)?;
    let verdict = match space {
        Space::Bloch => bloch_vanishing(&h, &Weight::One, cfg).tag,
        Space::Bmoa => bmoa_vanishing(&h, &Weight::One, cfg)?.tag,
    };
    Ok(CoreReport { space, in_core: seminorm.value.is_finite() && verdict.is_finite(), seminorm, verdict })
}

/// The six-member test family.
pub fn standard_family() -> Vec<Func> {
    ["1", "z", "z^2", "log(e/(1-z))", "sqrt(log(e/(1-z)))", "(0.5-z)/(1-0.5*z)"]
        .iter()
        .map(|s| ExprFn::parse(s).map(ExprFn::handle))
        .collect::<Result<_>>()
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberProbe {
    pub label: String,
    /// `|f(0)| + ‖f‖` at the fine resolution.
    pub norm: f64,
    pub image_coarse: f64,
    pub image_fine: f64,
    pub ratio_coarse: f64,
    pub ratio_fine: f64,
    pub grows: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorProbe {
    pub symbol: String,
    pub space: Space,
    pub coarse_depth: usize,
    pub fine_depth: usize,
    pub members: Vec<MemberProbe>,
    /// Growth of the log-weighted seminorm of `g` between the resolutions.
    pub symbol_log_growth: f64,
    /// A growing weighted seminorm of `g` is matched by a growing ratio.
    pub consistent: bool,
    pub marker: &'static str,
}

/// Ratios `‖T_g f‖/‖f‖` at two resolutions.
pub fn boundedness_probe(g: Func, space: Space, family: &[Func], coarse: usize, cfg: &SpaceConfig, growth: f64) -> Result<OperatorProbe> {
    if family.is_empty() {
        return Err(crate::Error::domain("empty test family"));
    }
    let at = |depth: usize| {
        let mut c = *cfg;
        match space {
            Space::Bloch => c.bloch_depth = depth,
            Space::Bmoa => c.bmoa_depth = depth,
        }
        c
    };
    let fine = match space {
        Space::Bloch => cfg.bloch_depth,
        Space::Bmoa => cfg.bmoa_depth,
    };
    let (cc, fc) = (at(coarse.min(fine)), at(fine));
    let mut members = Vec::with_capacity(family.len());
    for f in family {
        let tg = volterra_apply(g.clone(), f.clone());
        let norm = f.value(ZERO)?.norm() + seminorm(f.as_ref(), space, &Weight::One, &fc)?.value;
        let image_coarse = seminorm(tg.as_ref(), space, &Weight::One, &cc)?.value;
        let image_fine = seminorm(tg.as_ref(), space, &Weight::One, &fc)?.value;
        let (ratio_coarse, ratio_fine) = (image_coarse / norm, image_fine / norm);
        members.push(MemberProbe {
            label: f.label(),
            norm,
            image_coarse,
            image_fine,
            ratio_coarse,
            ratio_fine,
            grows: ratio_fine > growth * ratio_coarse && ratio_fine > 0.0,
        });
    }
    let gc = seminorm(g.as_ref(), space, &Weight::log(), &cc)?.value;
    let gf = seminorm(g.as_ref(), space, &Weight::log(), &fc)?.value;
    let symbol_log_growth = if gc > 0.0 { gf / gc } else { 1.0 };
    let consistent = symbol_log_growth <= growth || members.iter().any(|m| m.grows);
    Ok(OperatorProbe {
        symbol: g.label(),
        space,
        coarse_depth: coarse.min(fine),
        fine_depth: fine,
        members,
        symbol_log_growth,
        consistent,
        marker: PROBE_MARKER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::finite_difference;

    fn e(s: &str) -> Func {
        ExprFn::parse(s).unwrap().handle()
    }

    #[test]
    fn volterra_examples() {
        let z = C64::new(0.3, 0.2);
        let t = volterra_apply(e("z"), e("1"));
        assert!((t.value(z).unwrap() - z).norm() < 1e-14);
        let t = volterra_apply(e("log(e/(1-z))"), e("1"));
        assert!((t.value(z).unwrap() - (e("log(e/(1-z))").value(z).unwrap() - 1.0)).norm() < 1e-12);
        assert_eq!(volterra_apply(e("log(e/(1-z))"), e("0")).value(z).unwrap(), ZERO);
        assert_eq!(t.value(ZERO).unwrap(), ZERO);
        let d = finite_difference(t.as_ref(), z, 1e-5).unwrap();
        assert!((d - t.deriv(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn compose_examples() {
        let cfg = FlowConfig::default();
        let z = C64::new(0.3, -0.4);
        let rot = Arc::new(Generator::parse("i*z").unwrap());
        let c = compose_apply(rot.clone(), 0.0, e("z"), &cfg).unwrap();
        assert_eq!(c.value(z).unwrap(), z);
        let c = compose_apply(rot, std::f64::consts::PI, e("z"), &cfg).unwrap();
        assert!((c.value(z).unwrap() + z).norm() < 1e-9);
        let c = compose_apply(Arc::new(Generator::parse("-z").unwrap()), 1.0, e("z^2"), &cfg).unwrap();
        assert!((c.value(z).unwrap() - (-2f64).exp() * z * z).norm() < 1e-9);
    }

    #[test]
    fn dense_core_examples() {
        let c = SpaceConfig::default();
        let dil = Arc::new(Generator::parse("-z").unwrap());
        let rot = Arc::new(Generator::parse("i*z").unwrap());
        assert!(dense_core_test(dil.clone(), e("z"), Space::Bloch, &c).unwrap().in_core);
        assert!(dense_core_test(rot, e("log(e/(1-z))"), Space::Bloch, &c).unwrap().in_core);
        assert!(dense_core_test(dil, e("2"), Space::Bloch, &c).unwrap().in_core);
    }
}
