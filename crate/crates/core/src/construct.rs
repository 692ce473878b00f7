//! Building blocks `β_w` and the recursive constructions of a symbol `F`
//! whose Volterra image `T_g F` stays bounded but does not vanish at the
//! boundary, in the BMOA and in the Bloch setting.
//!
//! Everything near the circle is evaluated in extended precision: points are
//! [`NearPt`]s, box averages are pulled back to the reference half-disc in
//! closed form, and the gaps of the block centers are [`XR`]s.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use astro_float::BigFloat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::HoloExpr;
use crate::func::{ExprFn, Holo};
use crate::hypgeo::{eta_of_len, DiscPoint};
use crate::quad::{cubature, disc_integral, half_disc_cells, log_gap_breaks, Estimate, QuadConfig, Rect};
use crate::spaces::{self, Argmax, Space, SpaceConfig, Weight};
use crate::xnum::{turn, turn_add, turn_f64, turn_parse, turn_to_string, LNum, NearPt, XC, XR, DEFAULT_PRECISION_BITS};

/// Absolute bound on `|β_w|` away from the box over `w*`.
pub const C0: f64 = 3.0;
/// Recorded bound on the Bloch seminorm of any block.
pub const BLOCH_BOUND: f64 = 2.0;
/// Recorded bound on the BMOA seminorm of any block.
pub const BMOA_BOUND: f64 = 3.0;
pub const EXHAUSTED: &str = "divergence evidence insufficient at this precision";
pub const STATE_VERSION: u32 = 1;

/// Disc point `(1 - gap) exp(2πi t)` with an extended-precision gap.
#[derive(Clone, Debug)]
pub struct ExtPoint {
    pub t: BigFloat,
    pub gap: XR,
}

impl ExtPoint {
    pub fn new(t: BigFloat, gap: XR) -> Self {
        ExtPoint { t, gap }
    }

    /// Angle given as a turn fraction.
    pub fn polar(turns: f64, gap: XR, p: usize) -> Self {
        ExtPoint { t: turn(turns, p), gap }
    }

    pub fn from_disc(d: &DiscPoint, p: usize) -> Self {
        Self::polar(d.theta / TAU, XR::new(d.gap), p)
    }

    pub fn near(&self, p: usize) -> NearPt {
        NearPt::radial(self.t.clone(), self.gap, p)
    }

    pub fn repr(&self) -> Result<PointRepr> {
        Ok(PointRepr { turn: turn_to_string(&self.t)?, gap: self.gap })
    }

    pub fn from_repr(r: &PointRepr, p: usize) -> Result<Self> {
        Ok(ExtPoint { t: turn_parse(&r.turn, p)?, gap: r.gap })
    }
}

/// Serialized point: angle as a decimal turn fraction, gap `1 - |z|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRepr {
    pub turn: String,
    pub gap: XR,
}

/// Boundary arc with an extended-precision length, plus the apex gap `η`
/// of its Carleson box.
#[derive(Clone, Debug)]
pub struct ExtArc {
    pub center: BigFloat,
    /// Normalized length, a fraction of the whole circle.
    pub len: XR,
    pub eta: XR,
    /// Dyadic level, when the arc belongs to the dyadic family.
    pub level: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRepr {
    pub center_turn: String,
    pub len: XR,
    pub level: Option<u64>,
}

fn eta_ext(len: XR) -> XR {
    let lf = len.to_f64();
    if lf >= 1e-5 {
        return XR::new(eta_of_len(lf));
    }
    let x = len.scale(PI);
    let xf = x.to_f64();
    x.scale(1.0 - xf / 2.0 + xf * xf / 3.0)
}

impl ExtArc {
    pub fn full(p: usize) -> Self {
        ExtArc { center: turn(0.0, p), len: XR::ONE, eta: XR::ONE, level: Some(0) }
    }

    pub fn is_full(&self) -> bool {
        self.len >= XR::ONE
    }

    /// Arc of length `2^{-j}` centered `k` grid steps of `2^{-j-2}` turns
    /// away from `base`.
    pub fn dyadic(base: &BigFloat, j: u64, k: i64, p: usize) -> Self {
        if j == 0 {
            return Self::full(p);
        }
        let off = XR::new(k as f64).ldexp(-(j as i64) - 2).to_big(p);
        let len = XR::pow2(-(j as i64));
        ExtArc { center: turn_add(base, &off, p), len, eta: eta_ext(len), level: Some(j) }
    }

    /// The arc whose box has apex `w`.
    pub fn of_point(w: &ExtPoint) -> Self {
        let e = w.gap;
        let len = if e.to_f64() > 1e-6 {
            let ef = e.to_f64();
            XR::new((ef * (2.0 - ef)).atan2(2.0 * (1.0 - ef)) / PI)
        } else {
            let y = e.mul(XR::new(2.0).sub(e)).div(XR::new(2.0).mul(XR::ONE.sub(e)));
            let yf = y.to_f64();
            y.scale((1.0 - yf * yf / 3.0) / PI)
        };
        ExtArc { center: w.t.clone(), len, eta: e, level: None }
    }

    pub fn repr(&self) -> Result<ArcRepr> {
        Ok(ArcRepr { center_turn: turn_to_string(&self.center)?, len: self.len, level: self.level })
    }
}

/// Image of `ζ = ρ e^{iφ}` (with `ρ = 1 - gap`) under the box map of `arc`,
/// together with `|1 + aζ|²`.
pub fn box_point(arc: &ExtArc, gap: f64, phi: f64, p: usize) -> (NearPt, f64) {
    let rho = 1.0 - gap;
    let s = phi.sin();
    let half = 0.5 * phi;
    let omz = C64::new(gap + 2.0 * rho * half.sin().powi(2), -rho * s);
    let opz = C64::new(gap + 2.0 * rho * half.cos().powi(2), rho * s);
    let zeta = C64::from_polar(rho, phi);
    let den = XC::new(opz).sub(&XC::new(zeta).mul_r(arc.eta));
    let d = XC::new(omz).mul_r(arc.eta).div(&den);
    let den2 = den.norm_sqr().to_f64();
    (NearPt::new(arc.center.clone(), d, p), den2)
}

/// `(1/|I|) ∫_{S(I)} X(z)(1 - |z|²) dm(z)`.
///
/// The closure returns `X` in extended precision; it is rescaled by `η²`
/// before leaving extended range, which is where the size of `X` cancels.
pub fn box_avg<F: FnMut(&NearPt) -> Result<XR>>(arc: &ExtArc, mut x: F, q: &QuadConfig, p: usize) -> Result<Estimate> {
    if arc.is_full() {
        let cells = Rect::grid(&log_gap_breaks(q.s_max(), q.radial_cells), q.angular_cells, 0.0, 1.0);
        return cubature(
            &cells,
            |s, t| {
                let gap = (-s).exp();
                let pt = NearPt::radial(turn(t, p), XR::new(gap), p);
                let w = gap * (2.0 - gap);
                Ok(x(&pt)?.to_f64() * w * (1.0 - gap) * gap * 2.0)
            },
            q,
        );
    }
    let eta2 = arc.eta.mul(arc.eta);
    let ef = arc.eta.to_f64();
    let k = (2.0 - ef).powi(3) * arc.eta.div(arc.len).to_f64();
    cubature(
        &half_disc_cells(q),
        |s, phi| {
            let gap = (-s).exp();
            let (pt, den2) = box_point(arc, gap, phi, p);
            let v = x(&pt)?.mul(eta2).to_f64();
            Ok(v * k * gap * (2.0 - gap) * (1.0 - gap) * gap / (PI * den2.powi(3)))
        },
        q,
    )
}

/// Building block `β_w(z) = log(e / (1 - σ_{w*}(z) w̄))` with
/// `σ_a(z) = (z - a)/(1 - ā z)` and `w*` the hyperbolic midpoint of `0, w`.
#[derive(Clone, Debug)]
pub struct Block {
    pub w: ExtPoint,
    pub eps_star: XR,
    pub arc: ExtArc,
    pub arc_star: ExtArc,
    pub c0: f64,
    p: usize,
}

/// Serializable summary of a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub w: PointRepr,
    pub w_star: PointRepr,
    pub arc_w: ArcRepr,
    pub arc_w_star: ArcRepr,
    pub c0: f64,
    /// Relative defect of `1 - |w*||w| = sqrt(1 - |w|²)`.
    pub midpoint_defect: f64,
}

pub fn make_block(w: &ExtPoint, p: usize) -> Result<Block> {
    Block::new(w.clone(), p)
}

impl Block {
    pub fn new(w: ExtPoint, p: usize) -> Result<Self> {
        if !(w.gap < XR::ONE) {
            return Err(Error::domain("building block needs w != 0"));
        }
        if !(w.gap > XR::ZERO) {
            return Err(Error::domain("building block needs |w| < 1"));
        }
        let e = w.gap;
        let s = e.mul(XR::new(2.0).sub(e)).sqrt();
        let eps_star = s.add(e).div(XR::ONE.add(s));
        let star = ExtPoint { t: w.t.clone(), gap: eps_star };
        Ok(Block { arc: ExtArc::of_point(&w), arc_star: ExtArc::of_point(&star), w, eps_star, c0: C0, p })
    }

    pub fn eps(&self) -> XR {
        self.w.gap
    }

    pub fn w_star(&self) -> ExtPoint {
        ExtPoint { t: self.w.t.clone(), gap: self.eps_star }
    }

    /// `β_w(z)` via `D = 1 - z e^{-iθ_w}`:
    /// `1 - σ_{w*}(z) w̄ = (ε ε* + D(2 - ε - ε*)) / (ε* + D(1 - ε*))`.
    pub fn beta(&self, z: &NearPt) -> XC {
        let d = z.rel_to(&self.w.t);
        let e = self.eps();
        let es = self.eps_star;
        let num = XC::from_xr(e.mul(es)).add(&d.mul_r(XR::new(2.0).sub(e).sub(es)));
        let den = XC::from_xr(es).add(&d.mul_r(XR::ONE.sub(es)));
        XC::new(C64::new(1.0, 0.0)).sub(&num.div(&den).ln())
    }

    /// Closed form `β_w(0) = 1 - log(1 + |w*||w|)`.
    pub fn beta_at_origin(&self) -> f64 {
        let r = 1.0 - self.eps().to_f64();
        let rs = 1.0 - self.eps_star.to_f64();
        1.0 - (1.0 + r * rs).ln()
    }

    /// Closed form `Re β_w(w) = log(e / sqrt(1 - |w|²))`.
    pub fn re_beta_at_w(&self) -> f64 {
        let e = self.eps();
        1.0 - 0.5 * e.mul(XR::new(2.0).sub(e)).ln()
    }

    pub fn midpoint_defect(&self) -> f64 {
        let e = self.eps();
        let lhs = e.add(self.eps_star).sub(e.mul(self.eps_star));
        let rhs = e.mul(XR::new(2.0).sub(e)).sqrt();
        lhs.sub(rhs).div(rhs).to_f64().abs()
    }

    pub fn params(&self) -> Result<BlockParams> {
        Ok(BlockParams {
            w: self.w.repr()?,
            w_star: self.w_star().repr()?,
            arc_w: self.arc.repr()?,
            arc_w_star: self.arc_star.repr()?,
            c0: self.c0,
            midpoint_defect: self.midpoint_defect(),
        })
    }

    fn point_of(&self, z: C64) -> NearPt {
        let r = z.norm();
        let t = if r == 0.0 { 0.0 } else { z.arg() / TAU };
        NearPt::radial(turn(t, self.p), XR::new(1.0 - r), self.p)
    }
}

impl Holo for Block {
    fn value(&self, z: C64) -> Result<C64> {
        let v = self.beta(&self.point_of(z)).to_c64();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain("block evaluated outside the disc"))
        }
    }

    fn deriv(&self, z: C64) -> Result<C64> {
        let th = TAU * turn_f64(&self.w.t, self.p);
        let w = C64::from_polar(1.0 - self.eps().to_f64(), th);
        let rs = 1.0 - self.eps_star.to_f64();
        let ws = C64::from_polar(rs, th);
        let q = C64::new(1.0, 0.0) - ws.conj() * z;
        let sigma = (z - ws) / q;
        let v = (1.0 - rs * rs) / (q * q) * w.conj() / (1.0 - sigma * w.conj());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain("block derivative outside the disc"))
        }
    }

    fn label(&self) -> String {
        "beta_w".into()
    }
}

/// One checked property of a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub params: BlockParams,
    pub beta_at_origin: [f64; 2],
    pub beta_at_origin_closed: f64,
    pub re_beta_at_w: f64,
    pub re_beta_at_w_closed: f64,
    pub samples: usize,
    /// Measured `min Re β_w / log(e/(1-|w|²))` over the box of `w`.
    pub c4: f64,
    pub properties: Vec<PropertyCheck>,
}

fn sample_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(1000);
    for i in 0..25 {
        let gap = 10f64.powf(-(i as f64) / 2.0);
        for k in 0..40 {
            out.push((gap, -PI + (k as f64 + 0.5) * TAU / 40.0));
        }
    }
    out
}

/// Certifies the five block properties on a deterministic sample.
pub fn verify_block(w: &ExtPoint, p: usize) -> Result<BlockReport> {
    let b = make_block(w, p)?;
    let cfg = SpaceConfig::probe();
    let bloch = spaces::bloch_seminorm(&b, &Weight::One, &SpaceConfig::default())?.value;
    let bmoa = spaces::bmoa_seminorm(&b, &Weight::One, &cfg)?.value;
    let log_w = 1.0 - b.eps().mul(XR::new(2.0).sub(b.eps())).ln();
    let grid = sample_grid();
    let mut min_re = f64::INFINITY;
    let mut max_im: f64 = 0.0;
    let mut c4 = f64::INFINITY;
    let mut sup_out: f64 = 0.0;
    for &(gap, phi) in &grid {
        let (z, _) = box_point(&b.arc, gap, phi, p);
        let v = b.beta(&z).to_c64();
        min_re = min_re.min(v.re);
        max_im = max_im.max(v.im.abs());
        if phi.cos() >= 0.0 {
            c4 = c4.min(v.re / log_w);
        } else {
            let (z, _) = box_point(&b.arc_star, gap, phi, p);
            let v = b.beta(&z).to_c64();
            sup_out = sup_out.max(v.norm());
            min_re = min_re.min(v.re);
            max_im = max_im.max(v.im.abs());
        }
    }
    let origin = b.beta(&NearPt::radial(turn(0.0, p), XR::ONE, p)).to_c64();
    let at_w = b.beta(&b.w.near(p)).to_c64();
    let check = |name: &str, value: f64, bound: f64, pass: bool| PropertyCheck { name: name.into(), value, bound, pass };
    let properties = vec![
        check("bloch_seminorm", bloch, BLOCH_BOUND, bloch <= BLOCH_BOUND),
        check("bmoa_seminorm", bmoa, BMOA_BOUND, bmoa <= BMOA_BOUND),
        check("re_nonnegative", min_re, 0.0, min_re >= -1e-12),
        check("im_bounded", max_im, PI / 2.0 + 1e-12, max_im <= PI / 2.0 + 1e-12),
        check("box_lower_bound", c4, 0.4, c4 >= 0.4),
        check("outside_bound", sup_out, C0, sup_out <= C0),
    ];
    let report = BlockReport {
        params: b.params()?,
        beta_at_origin: [origin.re, origin.im],
        beta_at_origin_closed: b.beta_at_origin(),
        re_beta_at_w: at_w.re,
        re_beta_at_w_closed: b.re_beta_at_w(),
        samples: grid.len(),
        c4,
        properties,
    };
    let failed: Vec<&str> = report.properties.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::Invariant(format!("building block property violated: {}", failed.join(", "))));
    }
    if report.params.midpoint_defect > 1e-12 {
        return Err(Error::Invariant(format!("midpoint identity defect {}", report.params.midpoint_defect)));
    }
    Ok(report)
}

/// Resolutions of the recursive construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstructConfig {
    pub precision_bits: usize,
    pub n_max: usize,
    /// Tolerance on the non-vanishing witness (property 2).
    pub tol_c: f64,
    /// Relative slack on the seminorm bound (property 3).
    pub slack: f64,
    pub quad: QuadConfig,
    /// Levels scanned with every arc center (or every ring angle).
    pub full_levels: u64,
    /// Half width, in levels, of the windows around structural scales.
    pub window: u64,
    /// Candidate gaps go down to `δ'·2^{-max_octaves}`.
    pub max_octaves: u64,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig {
            precision_bits: DEFAULT_PRECISION_BITS,
            n_max: 4,
            tol_c: 0.05,
            slack: 1.1,
            quad: QuadConfig { rel_tol: 1e-3, max_cells: 1500, ..QuadConfig::default() },
            full_levels: 4,
            window: 8,
            max_octaves: 1 << 22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub j: u64,
    pub value: f64,
}

/// Per-step certification record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Coefficient bound `a_n ≤ 2^{-n}`.
    pub a_bound: f64,
    pub a_ok: bool,
    /// `sqrt(δ'_n) ≤ 2^{-2n} δ_n`.
    pub delta_ok: bool,
    /// The non-vanishing witness on `I_n` (or at `z_n`).
    pub witness: f64,
    pub witness_ok: bool,
    /// Windowed seminorm of the partial Volterra image.
    pub seminorm: f64,
    pub seminorm_bound: f64,
    pub seminorm_ok: bool,
    /// `sup |β_{w_n}|` over sampled points with gap at least `δ_n`.
    pub far_sup: f64,
    pub far_ok: bool,
}

impl Certificate {
    pub fn verdicts(&self) -> [bool; 5] {
        [self.a_ok, self.delta_ok, self.witness_ok, self.seminorm_ok, self.far_ok]
    }

    pub fn all(&self) -> bool {
        self.verdicts().iter().all(|&b| b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub w: PointRepr,
    pub a: XR,
    pub m: XR,
    pub delta: XR,
    pub delta_level: u64,
    pub delta_prime: XR,
    /// `I_n` for the BMOA construction.
    pub arc: Option<ArcRepr>,
    /// `z_n` for the Bloch construction.
    pub point: Option<PointRepr>,
    pub candidate_value: f64,
    pub candidate_target: f64,
    pub candidates_tried: usize,
    pub delta_scan: Vec<LevelValue>,
    pub cert: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    InProgress,
    Completed,
    Exhausted { step: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionState {
    pub version: u32,
    pub space: String,
    pub g: String,
    /// `g` is multiplied by this factor before the construction starts.
    pub scale: f64,
    /// `∫|g'|²(1-|z|²) dm` (BMOA) or `|g'(0)|` (Bloch) before scaling.
    pub normalization: f64,
    pub g_seminorm: f64,
    pub c_g: f64,
    pub precision_bits: usize,
    pub tol_c: f64,
    pub candidate_turn: String,
    pub steps: Vec<StepRecord>,
    /// `Σ a_k (seminorm bound + |β_{w_k}(0)|)` and its ceiling `4 Σ 2^{-k}`.
    pub block_sum: f64,
    pub block_sum_bound: f64,
    pub outcome: Outcome,
}

impl ConstructionState {
    pub fn n(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::numerical(format!("serializing state: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let st: ConstructionState =
            serde_json::from_str(s).map_err(|e| Error::domain(format!("reading construction state: {e}")))?;
        if st.version != STATE_VERSION {
            return Err(Error::domain(format!("unsupported state version {}", st.version)));
        }
        Ok(st)
    }

    /// Verdict pattern used to compare runs at different precisions.
    pub fn verdicts(&self) -> (Vec<[bool; 5]>, String) {
        let tag = match &self.outcome {
            Outcome::InProgress => "in_progress".to_string(),
            Outcome::Completed => "completed".to_string(),
            Outcome::Exhausted { step, .. } => format!("exhausted@{step}"),
        };
        (self.steps.iter().map(|s| s.cert.verdicts()).collect(), tag)
    }

    /// Partial sum `F_n` rebuilt from the recorded blocks.
    pub fn partial_sum(&self) -> Result<PartialSum> {
        let p = self.precision_bits;
        let mut terms = Vec::new();
        for s in self.steps.iter().skip(1) {
            terms.push((s.a, Block::new(ExtPoint::from_repr(&s.w, p)?, p)?));
        }
        Ok(PartialSum { terms })
    }
}

/// `F_n = 1 + Σ a_k β_{w_k}`.
#[derive(Clone, Debug, Default)]
pub struct PartialSum {
    pub terms: Vec<(XR, Block)>,
}

impl PartialSum {
    pub fn eval(&self, z: &NearPt) -> XC {
        let mut acc = XC::new(C64::new(1.0, 0.0));
        for (a, b) in &self.terms {
            acc = acc.add(&b.beta(z).mul_r(*a));
        }
        acc
    }
}

impl Holo for PartialSum {
    fn value(&self, z: C64) -> Result<C64> {
        let mut acc = C64::new(1.0, 0.0);
        for (a, b) in &self.terms {
            acc += b.value(z)? * a.to_f64();
        }
        Ok(acc)
    }

    fn deriv(&self, z: C64) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in &self.terms {
            acc += b.deriv(z)? * a.to_f64();
        }
        Ok(acc)
    }

    fn label(&self) -> String {
        format!("F_{}", self.terms.len())
    }
}

fn level_of(x: XR) -> u64 {
    (1 - x.exponent()).max(0) as u64
}

struct Ctx<'a> {
    space: Space,
    dg: HoloExpr,
    scale: f64,
    cfg: &'a ConstructConfig,
    p: usize,
    center: BigFloat,
}

/// Level values of the current partial sum, keyed by dyadic level.
type LevelCache = BTreeMap<u64, (f64, Probe)>;

#[derive(Clone, Debug)]
enum Probe {
    Arc(ExtArc),
    Point(NearPt),
}

impl Ctx<'_> {
    fn gprime(&self, z: &NearPt) -> Result<XC> {
        Ok(self.dg.eval_in(&LNum::near(z.clone()))?.to_xc().mul_c(C64::new(self.scale, 0.0)))
    }

    fn arcs_at(&self, j: u64) -> Vec<ExtArc> {
        if j == 0 {
            return vec![ExtArc::full(self.p)];
        }
        if j <= self.cfg.full_levels {
            let base = turn(0.0, self.p);
            (0..(1i64 << (j + 2))).map(|k| ExtArc::dyadic(&base, j, k, self.p)).collect()
        } else {
            (-4..=4).map(|k| ExtArc::dyadic(&self.center, j, k, self.p)).collect()
        }
    }

    fn points_at(&self, gap: XR) -> Vec<NearPt> {
        let j = level_of(gap);
        if j <= 2 * self.cfg.full_levels {
            let n = 8u64 << j;
            (0..n).map(|k| NearPt::radial(turn(k as f64 / n as f64, self.p), gap, self.p)).collect()
        } else {
            (-16..=16)
                .map(|m| {
                    let off = gap.scale(m as f64 / 8.0).to_big(self.p);
                    NearPt::radial(turn_add(&self.center, &off, self.p), gap, self.p)
                })
                .collect()
        }
    }

    /// Best value over one level of `|F g'|²` box averages (BMOA) or of
    /// `|F g'|(1-|z|²)` ring samples (Bloch).
    fn level(&self, f: &PartialSum, j: u64) -> Result<(f64, Probe)> {
        match self.space {
            Space::Bmoa => {
                let mut best: Option<(f64, Probe)> = None;
                for arc in self.arcs_at(j) {
                    let v = box_avg(&arc, |z| Ok(f.eval(z).mul(&self.gprime(z)?).norm_sqr()), &self.cfg.quad, self.p)?.value;
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, Probe::Arc(arc)));
                    }
                }
                Ok(best.expect("nonempty level"))
            }
            Space::Bloch => {
                let gap = if j == 0 { XR::ONE } else { XR::pow2(-(j as i64)) };
                let mut best: Option<(f64, Probe)> = None;
                for z in self.points_at(gap) {
                    let v = self.bloch_density(f, &z)?;
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, Probe::Point(z)));
                    }
                }
                Ok(best.expect("nonempty level"))
            }
        }
    }

    fn bloch_density(&self, f: &PartialSum, z: &NearPt) -> Result<f64> {
        Ok(f.eval(z).mul(&self.gprime(z)?).abs().mul(z.one_minus_abs2()).to_f64())
    }

    fn levels(&self, f: &PartialSum, js: &[u64], cache: &mut LevelCache) -> Result<()> {
        for &j in js {
            if !cache.contains_key(&j) {
                let v = self.level(f, j)?;
                cache.insert(j, v);
            }
        }
        Ok(())
    }

    /// Levels scanned for sups: everything up to 24, windows around the
    /// structural scales and a geometric stride beyond them.
    fn scan_set(&self, structural: &[u64]) -> Vec<u64> {
        let mut js: Vec<u64> = (0..=24).collect();
        let w = self.cfg.window;
        for &s in structural {
            js.extend(s.saturating_sub(w)..=s + w);
        }
        let top = structural.iter().copied().max().unwrap_or(0);
        let mut j = 24u64;
        while j < 2 * top + 64 {
            j = j * 5 / 4 + 1;
            js.push(j);
        }
        js.sort_unstable();
        js.dedup();
        js
    }

    fn sup_over(&self, f: &PartialSum, structural: &[u64], cache: &mut LevelCache) -> Result<(f64, u64)> {
        let js = self.scan_set(structural);
        self.levels(f, &js, cache)?;
        let (j, v) = cache
            .iter()
            .map(|(j, v)| (*j, v.0))
            .fold((0, f64::NEG_INFINITY), |b, v| if v.1 > b.1 { v } else { b });
        Ok((v, j))
    }

    /// Largest dyadic `δ = 2^{-j}` with every level at or below `δ` within 1.
    fn find_delta(&self, f: &PartialSum, structural: &[u64], cache: &mut LevelCache) -> Result<u64> {
        let js = self.scan_set(structural);
        self.levels(f, &js, cache)?;
        let top = structural.iter().copied().max().unwrap_or(0);
        loop {
            let (&last, _) = cache.iter().next_back().expect("nonempty scan");
            let tail_ok = cache.range(last / 2..).all(|(_, v)| v.0 <= 1.0);
            if tail_ok && last > top + self.cfg.window {
                break;
            }
            if last > 1 << 40 {
                return Err(Error::Inconclusive("no scale with small box averages found".into()));
            }
            let next = last * 3 / 2 + 1;
            self.levels(f, &[next], cache)?;
        }
        let Some(mut bad) = cache.iter().filter(|(_, v)| v.0 > 1.0).map(|(j, _)| *j).next_back() else {
            return Ok(0);
        };
        let mut good = *cache.range(bad + 1..).next().expect("tail level").0;
        while good > bad + 1 {
            let mid = bad + (good - bad) / 2;
            self.levels(f, &[mid], cache)?;
            if cache[&mid].0 > 1.0 {
                bad = mid;
            } else {
                good = mid;
            }
        }
        Ok(good)
    }

    fn candidate_value(&self, b: &Block) -> Result<f64> {
        match self.space {
            Space::Bmoa => Ok(box_avg(
                &b.arc,
                |z| {
                    let re = b.beta(z).re();
                    Ok(re.mul(re).mul(self.gprime(z)?.norm_sqr()))
                },
                &self.cfg.quad,
                self.p,
            )?
            .value),
            Space::Bloch => self.block_density(b, &b.w.near(self.p)),
        }
    }

    fn block_density(&self, b: &Block, z: &NearPt) -> Result<f64> {
        Ok(b.beta(z).re().mul(self.gprime(z)?.abs()).mul(z.one_minus_abs2()).to_f64())
    }
}

fn candidate_octaves(max: u64) -> Vec<u64> {
    let mut ks: Vec<u64> = (0..=16).collect();
    let mut k = 16u64;
    while k < max {
        k = (k * 3 / 2).min(max);
        ks.push(k);
    }
    ks
}

fn divergence_turn(space: Space, g: &ExprFn) -> Result<f64> {
    match space {
        Space::Bmoa => {
            let l = spaces::arc_levels(g, &Weight::log(), 8..=8, &SpaceConfig::probe())?;
            Ok(l[0].arc.center / TAU)
        }
        Space::Bloch => {
            let cfg = SpaceConfig { bloch_depth: 10, ..SpaceConfig::default() };
            match spaces::bloch_seminorm(g, &Weight::log(), &cfg)?.argmax {
                Argmax::Point { point } => Ok(point.theta / TAU),
                Argmax::Arc { arc } => Ok(arc.center / TAU),
            }
        }
    }
}

fn structural_levels(steps: &[StepRecord]) -> Vec<u64> {
    let mut s = Vec::new();
    for st in steps.iter().skip(1) {
        s.push(st.delta_level);
        s.push(level_of(st.delta_prime));
        s.push(level_of(st.w.gap));
        if let Some(a) = &st.arc {
            s.push(level_of(a.len));
        }
        if let Some(p) = &st.point {
            s.push(level_of(p.gap));
        }
    }
    s
}

/// Runs (or resumes) the recursive construction for `space`.
pub fn build(space: Space, g_src: &str, cfg: &ConstructConfig, resume: Option<ConstructionState>) -> Result<ConstructionState> {
    cfg.quad.validate()?;
    if cfg.precision_bits < 64 {
        return Err(Error::domain("precision must be at least 64 bits"));
    }
    let p = cfg.precision_bits;
    let g = ExprFn::parse(g_src)?;
    let space_name = match space {
        Space::Bmoa => "bmoa",
        Space::Bloch => "bloch",
    };
    let mut state = match resume {
        Some(st) => {
            if st.space != space_name || st.g != g.f.to_string() {
                return Err(Error::domain("state belongs to a different construction"));
            }
            st
        }
        None => fresh_state(space, &g, space_name, cfg)?,
    };
    if matches!(state.outcome, Outcome::Exhausted { .. }) {
        return Ok(state);
    }
    let ctx = Ctx {
        space,
        dg: g.df.clone(),
        scale: state.scale,
        cfg,
        p,
        center: turn_parse(&state.candidate_turn, p)?,
    };
    let mut f = state.partial_sum()?;
    let mut cache = LevelCache::new();
    if state.steps.is_empty() {
        let (sup, _) = ctx.sup_over(&f, &[], &mut cache)?;
        let seminorm = if space == Space::Bmoa { sup.sqrt() } else { sup };
        state.steps.push(base_step(seminorm, state.c_g));
    }
    while state.n() < cfg.n_max {
        let n = state.n() + 1;
        match step(&ctx, &mut state, &mut f, &mut cache, n)? {
            Some(rec) => {
                if !rec.cert.all() {
                    let dump = serde_json::to_string(&rec).unwrap_or_default();
                    return Err(Error::Invariant(format!("step {n} failed certification: {dump}")));
                }
                state.steps.push(rec);
            }
            None => {
                state.outcome = Outcome::Exhausted { step: n, message: EXHAUSTED.into() };
                break;
            }
        }
    }
    update_block_sum(&mut state, &f);
    if state.outcome == Outcome::InProgress && state.n() >= cfg.n_max {
        state.outcome = Outcome::Completed;
    }
    Ok(state)
}

pub fn build_bmoa(g: &str, cfg: &ConstructConfig) -> Result<ConstructionState> {
    build(Space::Bmoa, g, cfg, None)
}

pub fn build_bloch(g: &str, cfg: &ConstructConfig) -> Result<ConstructionState> {
    build(Space::Bloch, g, cfg, None)
}

fn fresh_state(space: Space, g: &ExprFn, name: &str, cfg: &ConstructConfig) -> Result<ConstructionState> {
    let (normalization, scale) = match space {
        Space::Bmoa => {
            let q = QuadConfig { rel_tol: 1e-6, ..QuadConfig::default() };
            let i = disc_integral(|s| Ok(g.df.eval(s.z)?.norm_sqr() * s.w), &q)?.value;
            if !(i > 0.0 && i.is_finite()) {
                return Err(Error::domain("g must have a nonzero finite Dirichlet-type integral"));
            }
            (i, 1.0 / i.sqrt())
        }
        Space::Bloch => {
            let d = g.df.eval(C64::new(0.0, 0.0))?.norm();
            if d == 0.0 {
                return Err(Error::domain("g'(0) must be nonzero"));
            }
            (d, 1.0 / d)
        }
    };
    let scaled = ExprFn::new(&g.f * &HoloExpr::real(scale));
    let (g_seminorm, c_g) = match space {
        Space::Bmoa => {
            let s = spaces::bmoa_seminorm(&scaled, &Weight::One, &SpaceConfig::probe())?.value;
            (s, 2.0 + 3.0 * s)
        }
        Space::Bloch => {
            let s = spaces::bloch_seminorm(&scaled, &Weight::One, &SpaceConfig::default())?.value;
            (s, 2.0 + 4.0 * s)
        }
    };
    let t = divergence_turn(space, g)?;
    Ok(ConstructionState {
        version: STATE_VERSION,
        space: name.into(),
        g: g.f.to_string(),
        scale,
        normalization,
        g_seminorm,
        c_g,
        precision_bits: cfg.precision_bits,
        tol_c: cfg.tol_c,
        candidate_turn: turn_to_string(&turn(t, cfg.precision_bits))?,
        steps: Vec::new(),
        block_sum: 1.0,
        block_sum_bound: 4.0,
        outcome: Outcome::InProgress,
    })
}

fn base_step(seminorm: f64, c_g: f64) -> StepRecord {
    StepRecord {
        n: 0,
        w: PointRepr { turn: "0".into(), gap: XR::ONE },
        a: XR::ONE,
        m: XR::ONE,
        delta: XR::ONE,
        delta_level: 0,
        delta_prime: XR::ONE,
        arc: Some(ArcRepr { center_turn: "0".into(), len: XR::ONE, level: Some(0) }),
        point: None,
        candidate_value: 0.0,
        candidate_target: 0.0,
        candidates_tried: 0,
        delta_scan: Vec::new(),
        cert: Certificate {
            a_bound: 1.0,
            a_ok: true,
            delta_ok: true,
            witness: 1.0,
            witness_ok: true,
            seminorm,
            seminorm_bound: c_g,
            seminorm_ok: true,
            far_sup: 0.0,
            far_ok: true,
        },
    }
}

fn update_block_sum(state: &mut ConstructionState, f: &PartialSum) {
    let bound = if state.space == "bmoa" { BMOA_BOUND } else { BLOCH_BOUND };
    let mut sum = 1.0;
    let mut cap = 4.0;
    for (k, (a, b)) in f.terms.iter().enumerate() {
        sum += a.to_f64() * (bound + b.beta_at_origin().abs());
        cap += 4.0 * 0.5f64.powi(k as i32 + 1);
    }
    state.block_sum = sum;
    state.block_sum_bound = cap;
}

/// One recursive step; `None` when the candidate search is exhausted.
fn step(
    ctx: &Ctx,
    state: &mut ConstructionState,
    f: &mut PartialSum,
    cache: &mut LevelCache,
    n: usize,
) -> Result<Option<StepRecord>> {
    let p = ctx.p;
    let structural = structural_levels(&state.steps);
    // Start from an empty cache so a resumed run scans the same levels.
    cache.clear();
    // scale below which F_{n-1} g' is small
    let jd = ctx.find_delta(f, &structural, cache)?;
    let delta_scan: Vec<LevelValue> = cache.iter().map(|(j, v)| LevelValue { j: *j, value: v.0 }).collect();
    let delta = XR::pow2(-(jd as i64));
    // inner scale δ'_n
    let dp = XR::pow2(-(2 * jd as i64 + 4 * n as i64)).min(delta);
    // candidate search along the divergence direction
    let target = match ctx.space {
        Space::Bmoa => 4f64.powi(n as i32),
        Space::Bloch => 2f64.powi(n as i32),
    };
    let mut found = None;
    let mut tried = 0;
    for k in candidate_octaves(ctx.cfg.max_octaves) {
        tried += 1;
        let b = Block::new(ExtPoint::new(ctx.center.clone(), dp.ldexp(-(k as i64))), p)?;
        let v = ctx.candidate_value(&b)?;
        if v >= target {
            found = Some((b, v));
            break;
        }
    }
    let Some((block, cand)) = found else {
        return Ok(None);
    };
    // maximal average (or value) over scales below δ_n
    let jw = level_of(block.arc.len).max(jd);
    let mut js: Vec<u64> = (jw.saturating_sub(10).max(jd)..=jw + 10).collect();
    js.extend((0..=8).map(|i| jd + (jw - jd) * i / 8));
    js.extend([jw + 16, jw + 32]);
    js.sort_unstable();
    js.dedup();
    let (m2, probe) = match ctx.space {
        Space::Bmoa => {
            let mut best = (cand, Probe::Arc(block.arc.clone()));
            for &j in &js {
                for arc in (-4..=4).map(|k| ExtArc::dyadic(&ctx.center, j, k, p)) {
                    let v = box_avg(
                        &arc,
                        |z| {
                            let re = block.beta(z).re();
                            Ok(re.mul(re).mul(ctx.gprime(z)?.norm_sqr()))
                        },
                        &ctx.cfg.quad,
                        p,
                    )?
                    .value;
                    if v > best.0 {
                        best = (v, Probe::Arc(arc));
                    }
                }
            }
            best
        }
        Space::Bloch => {
            let mut best = (cand, Probe::Point(block.w.near(p)));
            let mut gaps: Vec<XR> = (-40..=40).map(|k| block.eps().scale(2f64.powf(k as f64 / 4.0))).collect();
            gaps.extend(js.iter().map(|&j| XR::pow2(-(j as i64))));
            for gap in gaps.into_iter().filter(|g| *g <= delta) {
                for z in ctx.points_at(gap) {
                    let v = ctx.block_density(&block, &z)?;
                    if v > best.0 {
                        best = (v, Probe::Point(z));
                    }
                }
            }
            best
        }
    };
    let m = match ctx.space {
        Space::Bmoa => XR::new(m2).sqrt(),
        Space::Bloch => XR::new(m2),
    };
    let a = XR::ONE.div(m);
    f.terms.push((a, block.clone()));
    cache.clear();
    // witness
    let witness = match (&ctx.space, &probe) {
        (Space::Bmoa, Probe::Arc(arc)) => {
            box_avg(
                arc,
                |z| {
                    let re = f.eval(z).re();
                    Ok(re.mul(re).mul(ctx.gprime(z)?.norm_sqr()))
                },
                &ctx.cfg.quad,
                p,
            )?
            .value
        }
        (_, Probe::Point(z)) => f.eval(z).re().mul(ctx.gprime(z)?.abs()).mul(z.one_minus_abs2()).to_f64(),
        _ => unreachable!("probe kind follows the space"),
    };
    // seminorm of the partial image
    let mut st = structural;
    st.extend([jd, level_of(dp), level_of(block.eps()), jw]);
    let (sup, _) = ctx.sup_over(f, &st, cache)?;
    let seminorm = if ctx.space == Space::Bmoa { sup.sqrt() } else { sup };
    let prev = state.steps.last().map_or(0.0, |s| s.cert.seminorm);
    let bound = ctx.cfg.slack * (prev + 0.5f64.powi(n as i32) * state.c_g).max(state.c_g);
    // far bound from the choice of δ'_n
    let mut far_sup: f64 = 0.0;
    for k in 0..=12 {
        let gap = delta.ldexp(k).min(XR::ONE);
        for z in ctx.points_at(gap) {
            far_sup = far_sup.max(block.beta(&z).abs().to_f64());
        }
    }
    let a_bound = 0.5f64.powi(n as i32);
    let cert = Certificate {
        a_bound,
        a_ok: a.to_f64() <= a_bound * (1.0 + 1e-12),
        delta_ok: dp.sqrt() <= XR::pow2(-2 * n as i64).mul(delta),
        witness,
        witness_ok: witness >= 1.0 - state.tol_c,
        seminorm,
        seminorm_bound: bound,
        seminorm_ok: seminorm <= bound,
        far_sup,
        far_ok: far_sup <= C0,
    };
    let (arc, point) = match &probe {
        Probe::Arc(a) => (Some(a.repr()?), None),
        Probe::Point(z) => (None, Some(PointRepr { turn: turn_to_string(&z.t)?, gap: z.d.re() })),
    };
    Ok(Some(StepRecord {
        n,
        w: block.w.repr()?,
        a,
        m,
        delta,
        delta_level: jd,
        delta_prime: dp,
        arc,
        point,
        candidate_value: cand,
        candidate_target: target,
        candidates_tried: tried,
        delta_scan,
        cert,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    #[test]
    fn block_closed_forms() {
        let b = make_block(&ExtPoint::polar(0.0, XR::new(0.1), P), P).unwrap();
        assert!((1.0 - b.eps_star.to_f64() - 0.9 / (1.0 + 0.19f64.sqrt())).abs() < 1e-15);
        let at0 = b.beta(&NearPt::radial(turn(0.0, P), XR::ONE, P)).to_c64();
        assert!((at0.re - 0.55268).abs() < 1e-5, "{at0}");
        assert!((at0.re - b.beta_at_origin()).abs() < 1e-14);
        let atw = b.beta(&b.w.near(P)).to_c64();
        assert!((atw.re - 1.8303656).abs() < 1e-6, "{atw}");
        assert!(b.midpoint_defect() < 1e-14);
        assert!(make_block(&ExtPoint::polar(0.0, XR::ONE, P), P).is_err());
    }

    #[test]
    fn block_far_from_origin() {
        let e = XR::exp(-3000.0);
        let b = make_block(&ExtPoint::polar(0.0, e, P), P).unwrap();
        let atw = b.beta(&b.w.near(P)).to_c64();
        assert!((atw.re - b.re_beta_at_w()).abs() < 1e-9 * atw.re, "{atw}");
        assert!(b.midpoint_defect() < 1e-12);
    }

    #[test]
    fn box_average_of_one() {
        // average of (1-|z|²) over the box of an arc, against f64 quadrature
        let q = QuadConfig { rel_tol: 1e-8, ..QuadConfig::default() };
        let arc = ExtArc::dyadic(&turn(0.0, P), 3, 0, P);
        let v = box_avg(&arc, |_| Ok(XR::ONE), &q, P).unwrap().value;
        let b = crate::hypgeo::GeodesicBox::of(crate::hypgeo::Arc::new(0.0, 0.125).unwrap());
        let r = crate::quad::box_average(&b, |s| Ok(s.w), &q).unwrap().value;
        assert!((v - r).abs() < 1e-7, "{v} {r}");
        let full = box_avg(&ExtArc::full(P), |_| Ok(XR::ONE), &q, P).unwrap().value;
        assert!((full - 0.5).abs() < 1e-7, "{full}");
    }

    #[test]
    fn verify_examples() {
        for gap in [0.5, 0.1, 0.01] {
            let r = verify_block(&ExtPoint::polar(0.0, XR::new(gap), P), P).unwrap();
            assert!(r.c4 >= 0.4);
        }
        let b = make_block(&ExtPoint::polar(0.0, XR::new(0.5), P), P).unwrap();
        let v = b.value(C64::new(-0.5, 0.0)).unwrap();
        assert!(v.norm() <= 3.0);
    }
}
