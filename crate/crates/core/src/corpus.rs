//! Built-in generators and functions, and an end-to-end run over them.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::expr::HoloExpr;
use crate::func::ExprFn;
use crate::quad::LimitTag;
use crate::semigroup::{berkson_porta, classify, flow_times, Classification, FlowConfig, Generator, Kind};
use crate::spaces::{self, SpaceConfig, Weight};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub kind: Kind,
    pub minimal: bool,
}

/// The five generators on which minimality is decided.
pub fn generators() -> Vec<GeneratorEntry> {
    vec![
        GeneratorEntry { name: "rotation", source: "i*z", kind: Kind::Elliptic, minimal: true },
        GeneratorEntry { name: "contraction", source: "-z", kind: Kind::Elliptic, minimal: true },
        GeneratorEntry { name: "cusp", source: "-z*(1+z)/(1-z)", kind: Kind::Elliptic, minimal: false },
        GeneratorEntry { name: "parabolic", source: "(1-z)^2", kind: Kind::Parabolic, minimal: false },
        GeneratorEntry { name: "hyperbolic", source: "z^2-1", kind: Kind::Hyperbolic, minimal: false },
    ]
}

/// Berkson–Porta data `(τ, p)` with the classification they must produce.
pub fn berkson_porta_cases() -> Vec<(C64, &'static str, Kind, C64)> {
    vec![
        (C64::new(0.0, 0.0), "1", Kind::Elliptic, C64::new(1.0, 0.0)),
        (C64::new(0.0, 0.0), "-i", Kind::Elliptic, C64::new(0.0, -1.0)),
        (C64::new(1.0, 0.0), "1", Kind::Parabolic, C64::new(0.0, 0.0)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub univalent: bool,
}

pub fn functions() -> Vec<FunctionEntry> {
    vec![
        FunctionEntry { name: "identity", source: "z", univalent: true },
        FunctionEntry { name: "log", source: "log(e/(1-z))", univalent: true },
        FunctionEntry { name: "sqrt_log", source: "sqrt(log(e/(1-z)))", univalent: true },
        FunctionEntry { name: "power", source: "(2/3)*((1-z)^1.5-1)", univalent: true },
        FunctionEntry { name: "automorphism", source: "(0.5-z)/(1-0.5*z)", univalent: true },
    ]
}

/// Deterministic points spread over `|z| ≤ r_max` (golden-angle spiral).
pub fn spiral_points(n: usize, r_max: f64) -> Vec<C64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| C64::from_polar(r_max * ((k as f64 + 0.5) / n as f64).sqrt(), golden * k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationResiduals {
    /// `max |G(φ_t(z)) - G(z) ∂φ_t/∂z|`.
    pub spatial: f64,
    /// `max |(φ_{t+h}(z) - φ_t(z))/h - G(φ_t(z))|`.
    pub temporal: f64,
    pub h: f64,
    pub samples: usize,
}

/// Residuals of the two generator relations at `points × times`.
pub fn relation_residuals(gen: &Generator, points: &[C64], times: &[f64], cfg: &FlowConfig) -> Result<RelationResiduals> {
    let h = 1e-6;
    let mut out = RelationResiduals { spatial: 0.0, temporal: 0.0, h, samples: 0 };
    for &z in points {
        for &t in times {
            let tr = flow_times(gen, z, &[t, t + h], cfg)?;
            out.spatial = out.spatial.max(tr.residuals[0]);
            let fd = (tr.points[1] - tr.points[0]) / h;
            out.temporal = out.temporal.max((fd - gen.eval(tr.points[0])?).norm());
            out.samples += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorResult {
    pub name: String,
    pub source: String,
    pub classification: Classification,
    pub relations: RelationResiduals,
    pub lvb: LimitTag,
    pub lvmo: LimitTag,
    pub minimal: bool,
    pub expected_minimal: bool,
    pub verdicts_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerksonPortaResult {
    pub tau: C64,
    pub p: String,
    pub classification: Classification,
    pub expected_kind: Kind,
    pub lambda_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionResult {
    pub name: String,
    pub source: String,
    pub bloch: f64,
    pub bloch_vanishing: LimitTag,
    pub bmoa: f64,
    pub bmoa_vanishing: LimitTag,
    pub log_bloch_vanishing: LimitTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub generators: Vec<GeneratorResult>,
    pub berkson_porta: Vec<BerksonPortaResult>,
    pub functions: Vec<FunctionResult>,
    /// Every expectation recorded in the corpus was met. A function with a
    /// vanishing BMOA verdict may still get an inconclusive Bloch verdict
    /// (slow decay such as `1/sqrt(log)`), but never a non-vanishing one.
    pub consistent: bool,
}

pub fn run_corpus(cfg: &SpaceConfig, flow: &FlowConfig) -> Result<CorpusReport> {
    let pts = spiral_points(20, 0.9);
    let times = [0.25, 1.0, 2.0];
    let mut generators_out = Vec::new();
    for e in generators() {
        let g = Generator::parse(e.source)?;
        let relations = relation_residuals(&g, &pts, &times, flow)?;
        let m = spaces::minimality(&g, cfg)?;
        generators_out.push(GeneratorResult {
            name: e.name.into(),
            source: e.source.into(),
            classification: m.classification,
            relations,
            lvb: m.lvb,
            lvmo: m.lvmo,
            minimal: m.minimal,
            expected_minimal: e.minimal,
            verdicts_agree: m.verdicts_agree,
        });
    }
    let mut bp_out = Vec::new();
    for (tau, p, kind, lambda) in berkson_porta_cases() {
        let g = berkson_porta(tau, HoloExpr::parse(p)?)?;
        let c = classify(&g)?;
        bp_out.push(BerksonPortaResult {
            tau,
            p: p.into(),
            classification: c,
            expected_kind: kind,
            lambda_error: (c.lambda - lambda).norm(),
        });
    }
    let mut functions_out = Vec::new();
    for e in functions() {
        let f = ExprFn::parse(e.source)?;
        functions_out.push(FunctionResult {
            name: e.name.into(),
            source: e.source.into(),
            bloch: spaces::bloch_seminorm(&f, &Weight::One, cfg)?.value,
            bloch_vanishing: spaces::bloch_vanishing(&f, &Weight::One, cfg).tag,
            bmoa: spaces::bmoa_seminorm(&f, &Weight::One, cfg)?.value,
            bmoa_vanishing: spaces::bmoa_vanishing(&f, &Weight::One, cfg)?.tag,
            log_bloch_vanishing: spaces::bloch_vanishing(&f, &Weight::log(), cfg).tag,
        });
    }
    let consistent = generators_out
        .iter()
        .zip(generators())
        .all(|(r, e)| r.minimal == r.expected_minimal && r.classification.kind == e.kind && (!r.classification.kind.eq(&Kind::Elliptic) || r.verdicts_agree))
        && bp_out.iter().all(|b| b.classification.kind == b.expected_kind && b.lambda_error <= 1e-8)
        && functions_out
            .iter()
            .all(|f| f.bmoa_vanishing != LimitTag::Vanishes || !matches!(f.bloch_vanishing, LimitTag::BoundedNonvanishing | LimitTag::Unbounded));
    Ok(CorpusReport { generators: generators_out, berkson_porta: bp_out, functions: functions_out, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_on_corpus() {
        let pts = spiral_points(10, 0.9);
        for e in generators() {
            let g = Generator::parse(e.source).unwrap();
            let r = relation_residuals(&g, &pts, &[0.5, 2.0], &FlowConfig::default()).unwrap();
            assert!(r.spatial <= 1e-7 && r.temporal <= 1e-4, "{}: {r:?}", e.source);
        }
    }
}
