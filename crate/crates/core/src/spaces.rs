//! Bloch and BMOA seminorm estimators, their logarithmic versions, vanishing
//! verdicts, the LVB/LVMO conditions on generators, minimality, and the
//! weight machinery used by the weighted Pommerenke estimate.

use std::f64::consts::{E, TAU};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::Holo;
use crate::hypgeo::{Arc, DiscPoint, GeodesicBox, MobiusMap};
use crate::quad::{
    box_average, cubature, decide, grid_sup, log_gap_breaks, radial_limit, radial_schedule, ring_angles, ring_gap,
    Estimate, LimitTag, LimitVerdict, QuadConfig, Rect, Region, Thresholds,
};
use crate::semigroup::{classify, gamma_prime, Classification, Generator, Kind};

/// Weight `ω` on the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    One,
    /// `ω_K(z) = log(K/(1-|z|²))`.
    Log { k: f64 },
}

impl Weight {
    /// The logarithmic weight `log(e/(1-|z|²))` of the weighted spaces.
    pub fn log() -> Self {
        Weight::Log { k: E }
    }

    /// `ω_K` for `K > e²`.
    pub fn omega(k: f64) -> Result<Self> {
        if !(k > E * E) || !k.is_finite() {
            return Err(Error::domain(format!("weight parameter K = {k} must exceed e^2")));
        }
        Ok(Weight::Log { k })
    }

    /// `ω` as a function of `1 - |z|²`.
    pub fn at(&self, one_minus_abs2: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Log { k } => k.ln() - one_minus_abs2.ln(),
        }
    }

    /// Factor applied to a box average over an arc of normalised length `len`.
    pub fn arc_factor(&self, len: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Log { k } => (k.ln() - len.ln()).powi(2),
        }
    }

    /// `(1-|z|²)|∇ω|/ω` in closed form.
    pub fn regularity_ratio(&self, p: &DiscPoint) -> f64 {
        match self {
            Weight::One => 0.0,
            Weight::Log { .. } => 2.0 * p.modulus() / self.at(p.one_minus_abs2()),
        }
    }

    /// Declared regularity constant: `0` for `ω ≡ 1`, `2/log K` for `ω_K`.
    pub fn declared_c(&self) -> f64 {
        match self {
            Weight::One => 0.0,
            Weight::Log { k } => 2.0 / k.ln(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Weight::One => "none".into(),
            Weight::Log { k } if *k == E => "log".into(),
            Weight::Log { k } => format!("log(K={k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Bloch,
    Bmoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Argmax {
    Point { point: DiscPoint },
    Arc { arc: Arc },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    pub space: Space,
    pub weight: Weight,
    /// Grid lower bound for the seminorm.
    pub value: f64,
    pub argmax: Argmax,
    pub resolution: usize,
    /// Running value after each refinement level.
    pub history: Vec<f64>,
}

/// Resolutions for the space estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceConfig {
    /// Cubature controls for box averages and Garsia integrals.
    pub quad: QuadConfig,
    /// Dyadic depth `J` of the Bloch grid.
    pub bloch_depth: usize,
    /// Dyadic depth `J` of the arc family for BMOA seminorms.
    pub bmoa_depth: usize,
    /// Depth of the arc family used by BMOA vanishing verdicts.
    pub bmoa_vanish_depth: usize,
    /// Levels on which every arc center is visited; deeper levels only
    /// revisit windows around the best arcs of the previous level.
    pub full_levels: usize,
    pub window_top: usize,
    /// Deepest ring `j` of radial limits.
    pub radial_depth: usize,
    pub vanish_angles: usize,
    pub lvb_angles: usize,
    pub lvmo_angles: usize,
    pub pommerenke_angles: usize,
    pub thresholds: Thresholds,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            quad: QuadConfig::default().with_rel_tol(1e-5),
            bloch_depth: 12,
            bmoa_depth: 10,
            bmoa_vanish_depth: 24,
            full_levels: 6,
            window_top: 8,
            radial_depth: 40,
            vanish_angles: 512,
            lvb_angles: 64,
            lvmo_angles: 16,
            pommerenke_angles: 8,
            thresholds: Thresholds::default(),
        }
    }
}

impl SpaceConfig {
    /// Arc family for continuity probes: coarse levels in full, deep windows
    /// around the best arcs, looser cubature.
    pub fn probe() -> Self {
        SpaceConfig {
            quad: QuadConfig::default().with_rel_tol(1e-3),
            bmoa_depth: 14,
            full_levels: 3,
            window_top: 4,
            ..SpaceConfig::default()
        }
    }
}

fn bloch_density(f: &dyn Holo, w: &Weight, p: &DiscPoint) -> Result<f64> {
    let q = p.one_minus_abs2();
    Ok(f.deriv(p.value())?.norm() * q * w.at(q))
}

/// `sup |f'(z)|(1-|z|²)ω(z)` over the dyadic grid of depth `cfg.bloch_depth`.
pub fn bloch_seminorm(f: &dyn Holo, w: &Weight, cfg: &SpaceConfig) -> Result<SeminormReport> {
    let mut history = Vec::with_capacity(cfg.bloch_depth + 1);
    let mut best = grid_sup(|p| bloch_density(f, w, &p), Region::Disc, 0, cfg.quad.eps_min)?;
    history.push(best.value);
    for j in 1..=cfg.bloch_depth {
        let gap = ring_gap(j, cfg.quad.eps_min);
        let ring = grid_sup(|p| bloch_density(f, w, &p), Region::Circle(1.0 - gap), ring_angles(j), cfg.quad.eps_min)?;
        if ring.value > best.value {
            best = ring;
        }
        history.push(best.value);
    }
    Ok(SeminormReport {
        space: Space::Bloch,
        weight: *w,
        value: best.value,
        argmax: Argmax::Point { point: best.argmax },
        resolution: cfg.bloch_depth,
        history,
    })
}

fn angular_sup<F: FnMut(&DiscPoint) -> Result<f64>>(gap: f64, n: usize, mut f: F) -> Result<f64> {
    let mut best: Option<f64> = None;
    for k in 0..n {
        if let Ok(v) = f(&DiscPoint::polar(TAU * k as f64 / n as f64, gap)?) {
            if v.is_finite() {
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
    }
    best.ok_or_else(|| Error::domain(format!("no admissible sample on the circle of gap {gap}")))
}

/// Limit of the angular sup of the Bloch integrand as `|z| → 1`.
pub fn bloch_vanishing(f: &dyn Holo, w: &Weight, cfg: &SpaceConfig) -> LimitVerdict {
    radial_limit(
        |gap| angular_sup(gap, cfg.vanish_angles, |p| bloch_density(f, w, p)),
        cfg.radial_depth,
        cfg.quad.eps_min,
        cfg.thresholds,
    )
}

/// Weighted Carleson box average `factor(ℓ)·(1/ℓ)∫_{S(I)} |f'|²(1-|z|²) dm`.
pub fn box_quantity(f: &dyn Holo, w: &Weight, arc: Arc, q: &QuadConfig) -> Result<Estimate> {
    // Points mapped beyond the cutoff carry no weight.
    let e = box_average(
        &GeodesicBox::of(arc),
        |s| if s.w < q.eps_min { Ok(0.0) } else { Ok(f.deriv(s.z)?.norm_sqr() * s.w) },
        q,
    )?;
    let k = w.arc_factor(arc.len);
    Ok(Estimate { value: e.value * k, error: e.error * k, ..e })
}

/// Best arc of one dyadic level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcLevel {
    pub j: usize,
    pub len: f64,
    pub value: f64,
    pub arc: Arc,
    pub arcs_visited: usize,
}

fn level_arc(j: usize, k: usize) -> Arc {
    if j == 0 {
        return Arc::full();
    }
    let n = 1usize << (j + 2);
    Arc { center: TAU * (k % n) as f64 / n as f64, len: 0.5f64.powi(j as i32) }
}

/// Scans the dyadic arc family `ℓ = 2^{-j}` with centers on a `2^{j+2}`
/// grid. Deep levels are windowed around the best arcs of the level above.
pub fn arc_levels(f: &dyn Holo, w: &Weight, js: std::ops::RangeInclusive<usize>, cfg: &SpaceConfig) -> Result<Vec<ArcLevel>> {
    let mut out = Vec::new();
    let mut prev: Vec<(usize, f64)> = Vec::new();
    for j in 0..=*js.end() {
        let n = if j == 0 { 1 } else { 1usize << (j + 2) };
        let ks: Vec<usize> = if j <= cfg.full_levels.max(1) || prev.is_empty() {
            (0..n).collect()
        } else {
            let mut top = prev.clone();
            top.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut ks: Vec<usize> = top
                .iter()
                .take(cfg.window_top)
                .flat_map(|&(kp, _)| (-3i64..=3).map(move |d| (2 * kp as i64 + d).rem_euclid(n as i64) as usize))
                .collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        };
        let mut vals = Vec::with_capacity(ks.len());
        for &k in &ks {
            vals.push((k, box_quantity(f, w, level_arc(j, k), &cfg.quad)?.value));
        }
        if js.contains(&j) {
            let best = vals
                .iter()
                .copied()
                .fold((0usize, f64::NEG_INFINITY), |b, v| if v.1 > b.1 { v } else { b });
            out.push(ArcLevel { j, len: level_arc(j, 0).len, value: best.1, arc: level_arc(j, best.0), arcs_visited: vals.len() });
        }
        prev = vals;
    }
    Ok(out)
}

/// Square root of the sup of weighted box averages over the arc family.
pub fn bmoa_seminorm(f: &dyn Holo, w: &Weight, cfg: &SpaceConfig) -> Result<SeminormReport> {
    let levels = arc_levels(f, w, 0..=cfg.bmoa_depth, cfg)?;
    let mut history = Vec::with_capacity(levels.len());
    let mut best = levels[0];
    for l in &levels {
        if l.value > best.value {
            best = *l;
        }
        history.push(best.value.sqrt());
    }
    Ok(SeminormReport {
        space: Space::Bmoa,
        weight: *w,
        value: best.value.sqrt(),
        argmax: Argmax::Arc { arc: best.arc },
        resolution: cfg.bmoa_depth,
        history,
    })
}

/// Weighted box averages over arcs of length `2^{-j}` sharing one center.
pub fn bmoa_profile(f: &dyn Holo, w: &Weight, center: f64, js: &[usize], cfg: &SpaceConfig) -> Result<Vec<f64>> {
    js.iter()
        .map(|&j| Ok(box_quantity(f, w, Arc::new(center, 0.5f64.powi(j as i32))?, &cfg.quad)?.value))
        .collect()
}

/// Limit of the sup of box averages as the arc length goes to 0.
pub fn bmoa_vanishing(f: &dyn Holo, w: &Weight, cfg: &SpaceConfig) -> Result<LimitVerdict> {
    let levels = arc_levels(f, w, 2..=cfg.bmoa_vanish_depth, cfg)?;
    Ok(decide(levels.iter().map(|l| (l.len, l.value)).collect(), cfg.thresholds, 0))
}

/// `∫_𝔻 density(z)(1-|φ_a(z)|²) dm(z)`, computed after the change of
/// variables `z = ψ(ζ)` with `ψ(0) = a`, so that `1-|φ_a(z)|² = 1-|ζ|²`.
pub fn garsia_integral<F: FnMut(C64) -> Result<f64>>(mut density: F, a: &DiscPoint, q: &QuadConfig) -> Result<Estimate> {
    let r = a.modulus();
    let rot = C64::from_polar(1.0, a.theta);
    let k = a.one_minus_abs2();
    let cells = Rect::grid(&log_gap_breaks(q.s_max(), q.radial_cells), q.angular_cells, 0.0, TAU);
    cubature(
        &cells,
        |s, phi| {
            let gap = (-s).exp();
            let rho = 1.0 - gap;
            let zeta = C64::from_polar(rho, phi);
            let den = 1.0 + r * zeta;
            let z = rot * (zeta + r) / den;
            let jac = k * k / den.norm_sqr().powi(2);
            Ok(density(z)? * gap * (2.0 - gap) * jac * rho * gap / std::f64::consts::PI)
        },
        q,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    Lvb,
    Lvmo,
    Logbloch,
    Lbmo,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Lvb => "lvb",
            Condition::Lvmo => "lvmo",
            Condition::Logbloch => "logbloch",
            Condition::Lbmo => "lbmo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: LimitVerdict,
    pub satisfied: bool,
    /// For mean oscillation conditions: whether the boundary form `i/G` was
    /// used instead of `(z-τ)/G`.
    pub printed_form: Option<bool>,
    pub angles: usize,
    /// Point at which an inner integral failed to converge.
    pub offending: Option<C64>,
}

fn lvb_density(gen: &Generator, p: &DiscPoint) -> Result<f64> {
    let q = p.one_minus_abs2();
    let g = gen.eval(p.value())?.norm();
    if g == 0.0 {
        return Err(Error::domain("zero of the generator"));
    }
    Ok(q / g * (-q.ln()))
}

fn lvb_verdict(gen: &Generator, cfg: &SpaceConfig) -> LimitVerdict {
    radial_limit(
        |gap| angular_sup(gap, cfg.lvb_angles, |p| lvb_density(gen, p)),
        cfg.radial_depth,
        cfg.quad.eps_min,
        cfg.thresholds,
    )
}

fn condition_report(condition: Condition, verdict: LimitVerdict, angles: usize, printed: Option<bool>, offending: Option<C64>) -> ConditionReport {
    let satisfied = match condition {
        Condition::Lvb | Condition::Lvmo => verdict.tag == LimitTag::Vanishes,
        Condition::Logbloch | Condition::Lbmo => verdict.tag.is_finite(),
    };
    ConditionReport { condition, verdict, satisfied, printed_form: printed, angles, offending }
}

/// `(1-|z|²)/|G(z)|·log(1/(1-|z|²)) → 0`.
pub fn lvb_check(gen: &Generator, cfg: &SpaceConfig) -> ConditionReport {
    condition_report(Condition::Lvb, lvb_verdict(gen, cfg), cfg.lvb_angles, None, None)
}

/// The same quantity stays bounded.
pub fn logbloch_check(gen: &Generator, cfg: &SpaceConfig) -> ConditionReport {
    condition_report(Condition::Logbloch, lvb_verdict(gen, cfg), cfg.lvb_angles, None, None)
}

/// `Λ(a) = (log(e/(1-|a|²)))² ∫ |γ'|²(1-|φ_a|²) dm`.
pub fn lvmo_lambda(gen: &Generator, a: &DiscPoint, printed: bool, q: &QuadConfig) -> Result<Estimate> {
    let e = garsia_integral(|z| Ok(gamma_prime(gen, z, printed)?.norm_sqr()), a, q)?;
    let l = (1.0 - a.one_minus_abs2().ln()).powi(2);
    Ok(Estimate { value: e.value * l, error: e.error * l, ..e })
}

fn lvmo_verdict(gen: &Generator, printed: bool, cfg: &SpaceConfig) -> Result<(LimitVerdict, Option<C64>)> {
    classify(gen)?;
    let mut samples = Vec::new();
    for gap in radial_schedule(cfg.radial_depth, cfg.quad.eps_min) {
        let mut best = f64::NEG_INFINITY;
        for k in 0..cfg.lvmo_angles {
            let a = DiscPoint::polar(TAU * k as f64 / cfg.lvmo_angles as f64, gap)?;
            let e = match lvmo_lambda(gen, &a, printed, &cfg.quad) {
                Ok(e) if e.converged && e.value.is_finite() => e,
                _ => {
                    let mut v = decide(samples, cfg.thresholds, 0);
                    v.tag = LimitTag::Unbounded;
                    return Ok((v, Some(a.value())));
                }
            };
            best = best.max(e.value);
        }
        samples.push((gap, best));
    }
    Ok((decide(samples, cfg.thresholds, 0), None))
}

/// Logarithmic vanishing mean oscillation of `γ`.
pub fn lvmo_check(gen: &Generator, printed: bool, cfg: &SpaceConfig) -> Result<ConditionReport> {
    let (v, off) = lvmo_verdict(gen, printed, cfg)?;
    Ok(condition_report(Condition::Lvmo, v, cfg.lvmo_angles, Some(printed), off))
}

pub fn lbmo_check(gen: &Generator, printed: bool, cfg: &SpaceConfig) -> Result<ConditionReport> {
    let (v, off) = lvmo_verdict(gen, printed, cfg)?;
    Ok(condition_report(Condition::Lbmo, v, cfg.lvmo_angles, Some(printed), off))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub classification: Classification,
    pub elliptic: bool,
    pub lvb: LimitTag,
    pub lvmo: LimitTag,
    pub minimal: bool,
    /// LVB and LVMO agree on whether they vanish.
    pub verdicts_agree: bool,
    pub lvb_report: ConditionReport,
    pub lvmo_report: ConditionReport,
}

/// Minimality of the maximal subspace: elliptic and LVB.
pub fn minimality(gen: &Generator, cfg: &SpaceConfig) -> Result<MinimalityReport> {
    let classification = classify(gen)?;
    let elliptic = classification.kind == Kind::Elliptic;
    let lvb_report = lvb_check(gen, cfg);
    let lvmo_report = lvmo_check(gen, false, cfg)?;
    let (lvb, lvmo) = (lvb_report.verdict.tag, lvmo_report.verdict.tag);
    Ok(MinimalityReport {
        classification,
        elliptic,
        lvb,
        lvmo,
        minimal: elliptic && lvb == LimitTag::Vanishes,
        verdicts_agree: (lvb == LimitTag::Vanishes) == (lvmo == LimitTag::Vanishes),
        lvb_report,
        lvmo_report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Constant used downstream: `2/log K` for `ω_K`, `0` for `ω ≡ 1`.
    pub c_omega: f64,
    /// Grid sup of `(1-|z|²)|∇ω|/ω`.
    pub measured: f64,
    pub argmax: DiscPoint,
    /// The measured ratio never exceeds `c_omega`.
    pub holds: bool,
}

pub fn weight_regularity(w: &Weight, cfg: &SpaceConfig) -> Result<RegularityReport> {
    let s = grid_sup(|p| Ok(w.regularity_ratio(&p)), Region::Disc, cfg.radial_depth, cfg.quad.eps_min)?;
    let c = w.declared_c();
    Ok(RegularityReport { c_omega: c, measured: s.value, argmax: s.argmax, holds: s.value <= c * (1.0 + 1e-12) })
}

/// Smallest pairwise distance of `f` on a 200-point spiral sample.
pub fn univalence_margin(f: &dyn Holo) -> Result<f64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let vals = (0..200)
        .map(|k| f.value(C64::from_polar(0.95 * ((k as f64 + 0.5) / 200.0).sqrt(), golden * k as f64)))
        .collect::<Result<Vec<_>>>()?;
    let mut m = f64::INFINITY;
    for i in 0..vals.len() {
        for j in 0..i {
            m = m.min((vals[i] - vals[j]).norm());
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PommerenkeReport {
    pub weight: Weight,
    pub c_omega: f64,
    pub univalence_margin: f64,
    /// `|f'|(1-|z|²)ω(z) → 0`.
    pub hypothesis: LimitVerdict,
    /// `ω(a)² ∫ |f'|²(1-|φ_a|²) dm → 0`.
    pub conclusion: LimitVerdict,
    pub hypothesis_failed: bool,
    /// Hypothesis vanishes and conclusion vanishes; `None` when the
    /// hypothesis fails.
    pub contract_holds: Option<bool>,
}

pub fn pommerenke_check(f: &dyn Holo, w: &Weight, cfg: &SpaceConfig) -> Result<PommerenkeReport> {
    let margin = univalence_margin(f)?;
    if margin < 1e-9 {
        return Err(Error::domain(format!("univalence check failed: two samples at distance {margin:e}")));
    }
    let c = weight_regularity(w, cfg)?;
    if !(c.c_omega < 1.0) || !c.holds {
        return Err(Error::Admissibility(format!("weight regularity constant {} is not below 1", c.c_omega)));
    }
    let n = cfg.pommerenke_angles;
    let hypothesis = radial_limit(|gap| angular_sup(gap, n, |p| bloch_density(f, w, p)), cfg.radial_depth, cfg.quad.eps_min, cfg.thresholds);
    let conclusion = radial_limit(
        |gap| {
            angular_sup(gap, n, |a| {
                let e = garsia_integral(|z| Ok(f.deriv(z)?.norm_sqr()), a, &cfg.quad)?.require("Garsia integral")?;
                Ok(w.at(a.one_minus_abs2()).powi(2) * e.value)
            })
        },
        cfg.radial_depth,
        cfg.quad.eps_min,
        cfg.thresholds,
    );
    let hypothesis_failed = hypothesis.tag != LimitTag::Vanishes;
    let contract_holds = (!hypothesis_failed).then_some(conclusion.tag == LimitTag::Vanishes);
    Ok(PommerenkeReport {
        weight: *w,
        c_omega: c.c_omega,
        univalence_margin: margin,
        hypothesis,
        conclusion,
        hypothesis_failed,
        contract_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterIntegralReport {
    /// Upper Riemann sum of `∫_0^{r_J} S(r) dr`.
    pub estimate: f64,
    /// `S(r_J)(1 - r_J)`, the tail if `S` stopped growing.
    pub tail: f64,
    pub growth: bool,
    /// `(r, S(r))` with `S(r) = sup_{a, |z| ≤ r} (ω(a)|f_a(z)|)²`.
    pub profile: Vec<(f64, f64)>,
}

/// Outer integral of `sup_{a,|z|≤r}(ω(a)|f(φ_a(z)) - f(a)|)²` over `r`.
pub fn outer_sup_integral(f: &dyn Holo, w: &Weight, depth: usize) -> Result<OuterIntegralReport> {
    let mut base = vec![DiscPoint { theta: 0.0, gap: 1.0 }];
    for i in 1..=10 {
        for k in 0..8 {
            base.push(DiscPoint::polar(TAU * k as f64 / 8.0, 0.5f64.powi(i))?);
        }
    }
    let fa: Vec<(MobiusMap, C64, f64)> = base
        .iter()
        .map(|a| Ok((MobiusMap::phi(a.value()), f.value(a.value())?, w.at(a.one_minus_abs2()))))
        .collect::<Result<_>>()?;
    let sup_at = |r: f64| -> Result<f64> {
        let mut s: f64 = 0.0;
        for (m, v, om) in &fa {
            for i in 0..=4 {
                let rho = r * i as f64 / 4.0;
                let nk = if i == 0 { 1 } else { 16 };
                for k in 0..nk {
                    let z = C64::from_polar(rho, TAU * k as f64 / 16.0);
                    s = s.max((om * (f.value(m.apply(z))? - v).norm()).powi(2));
                }
            }
        }
        Ok(s)
    };
    let mut profile = vec![(0.0, sup_at(0.0)?)];
    let mut estimate = 0.0;
    for j in 1..=depth.max(1) {
        let r = 1.0 - 0.5f64.powi(j as i32);
        let s = sup_at(r)?;
        estimate += s * (r - profile[profile.len() - 1].0);
        profile.push((r, s));
    }
    let (rl, sl) = profile[profile.len() - 1];
    let tail = sl * (1.0 - rl);
    Ok(OuterIntegralReport { estimate, tail, growth: !(tail.is_finite() && tail <= 1e-2 * estimate.max(1.0)), profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ExprFn;

    fn cfg() -> SpaceConfig {
        SpaceConfig::default()
    }

    #[test]
    fn bloch_examples() {
        let r = bloch_seminorm(&ExprFn::parse("z").unwrap(), &Weight::One, &cfg()).unwrap();
        assert_eq!(r.value, 1.0);
        let r = bloch_seminorm(&ExprFn::parse("log(e/(1-z))").unwrap(), &Weight::One, &cfg()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.value > 1.95 && r.value < 2.0);
    }

    #[test]
    fn bloch_vanishing_examples() {
        let c = cfg();
        assert_eq!(bloch_vanishing(&ExprFn::parse("z").unwrap(), &Weight::One, &c).tag, LimitTag::Vanishes);
        assert_eq!(
            bloch_vanishing(&ExprFn::parse("log(e/(1-z))").unwrap(), &Weight::One, &c).tag,
            LimitTag::BoundedNonvanishing
        );
        let f = ExprFn::parse("(2/3)*((1-z)^1.5-1)").unwrap();
        assert_eq!(bloch_vanishing(&f, &Weight::log(), &c).tag, LimitTag::Vanishes);
    }

    #[test]
    fn bmoa_full_circle() {
        let c = SpaceConfig { bmoa_depth: 0, quad: QuadConfig::default().with_rel_tol(1e-11), ..cfg() };
        let r = bmoa_seminorm(&ExprFn::parse("z").unwrap(), &Weight::One, &c).unwrap();
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn garsia_dilation_closed_form() {
        // ∫(1-|φ_a|²) dm = (1-x)·((1-x)ln(1-x) + x)/x² with x = |a|².
        let q = QuadConfig::default().with_rel_tol(1e-10);
        for r in [0.3, 0.9, 0.999] {
            let a = DiscPoint::real(r).unwrap();
            let x: f64 = r * r;
            let exact = (1.0 - x) * ((1.0 - x) * (1.0 - x).ln() + x) / (x * x);
            let e = garsia_integral(|_| Ok(1.0), &a, &q).unwrap();
            assert!((e.value - exact).abs() < 1e-8 * exact.max(1e-3), "{r}: {} vs {exact}", e.value);
        }
    }

    #[test]
    fn lvb_examples() {
        let c = cfg();
        let g = Generator::parse("-z").unwrap();
        assert_eq!(lvb_check(&g, &c).verdict.tag, LimitTag::Vanishes);
        let v = lvb_density(&g, &DiscPoint::real(0.99).unwrap()).unwrap();
        let q: f64 = 1.0 - 0.99 * 0.99;
        assert!((v - q / 0.99 * (1.0 / q).ln()).abs() < 1e-12);
        assert!((v - 0.0787).abs() < 1e-4);
        assert_eq!(lvb_check(&Generator::parse("(1-z)^2").unwrap(), &c).verdict.tag, LimitTag::Unbounded);
        assert_eq!(lvb_check(&Generator::parse("-z*(1+z)/(1-z)").unwrap(), &c).verdict.tag, LimitTag::Unbounded);
    }

    #[test]
    fn regularity_constants() {
        let c = cfg();
        assert_eq!(weight_regularity(&Weight::One, &c).unwrap().c_omega, 0.0);
        for p in [3.0f64, 4.0, 6.0] {
            let r = weight_regularity(&Weight::omega(p.exp()).unwrap(), &c).unwrap();
            assert!((r.c_omega - 2.0 / p).abs() < 1e-10);
            assert!(r.holds && r.measured > 0.0);
        }
        assert!(Weight::omega(5.0).is_err());
    }

    #[test]
    fn outer_integral_small_cases() {
        let r = outer_sup_integral(&ExprFn::parse("z").unwrap(), &Weight::One, 16).unwrap();
        assert!(r.estimate <= 4.0 && !r.growth);
        let r = outer_sup_integral(&ExprFn::parse("3").unwrap(), &Weight::One, 16).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn bmoa_examples() {
        let c = cfg();
        let f = ExprFn::parse("log(e/(1-z))").unwrap();
        let r = bmoa_seminorm(&f, &Weight::One, &c).unwrap();
        assert!(r.value >= 0.5 && r.value <= 5.0);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(bmoa_vanishing(&f, &Weight::One, &c).unwrap().tag, LimitTag::BoundedNonvanishing);
        let g = ExprFn::parse("sqrt(log(e/(1-z)))").unwrap();
        let p = bmoa_profile(&g, &Weight::log(), 0.0, &(3..=10).collect::<Vec<_>>(), &c).unwrap();
        assert!(p.windows(2).all(|w| w[1] >= 1.05 * w[0]), "{p:?}");
        assert_eq!(bmoa_vanishing(&g, &Weight::One, &c).unwrap().tag, LimitTag::Vanishes);
        assert_eq!(bmoa_vanishing(&ExprFn::parse("z").unwrap(), &Weight::One, &c).unwrap().tag, LimitTag::Vanishes);
    }

    #[test]
    fn minimality_corpus() {
        let c = cfg();
        for (g, expect) in [("i*z", true), ("-z", true), ("-z*(1+z)/(1-z)", false), ("(1-z)^2", false), ("z^2-1", false)] {
            let m = minimality(&Generator::parse(g).unwrap(), &c).unwrap();
            assert_eq!(m.minimal, expect, "{g}");
            assert!(m.verdicts_agree, "{g}");
        }
    }
}
