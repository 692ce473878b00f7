//! Numerical engines: adaptive cubature over the disc and over Carleson
//! boxes, grid suprema, radial limit verdicts and line integrals.
//!
//! Everything here is sequential and deterministic. Area integrals use the
//! normalised measure `dm = dA/π`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::HoloExpr;
use crate::hypgeo::{DiscPoint, GeodesicBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of halvings of an initial cell.
    pub max_depth: u32,
    /// Maximum number of live cells before giving up.
    pub max_cells: usize,
    /// Boundary cutoff: nothing closer than this to the circle is sampled.
    pub eps_min: f64,
    pub radial_cells: usize,
    pub angular_cells: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-6,
            max_depth: 48,
            max_cells: 6000,
            eps_min: 1e-12,
            radial_cells: 7,
            angular_cells: 8,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.eps_min > 0.0
            && self.eps_min < 1.0
            && self.max_cells > 0
            && self.radial_cells > 0
            && self.angular_cells > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("quadrature configuration must be positive"))
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Largest value of the log-gap variable `s = -ln(1 - r)`.
    pub fn s_max(&self) -> f64 {
        -self.eps_min.ln()
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::numerical(format!(
                "{what}: subdivision budget exhausted (value {:e}, error {:e})",
                self.value, self.error
            )))
        }
    }
}

/// Axis-aligned rectangle in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn grid(xs: &[f64], ny: usize, y0: f64, y1: f64) -> Vec<Rect> {
        let mut out = Vec::new();
        for w in xs.windows(2) {
            for k in 0..ny {
                let a = y0 + (y1 - y0) * k as f64 / ny as f64;
                let b = y0 + (y1 - y0) * (k + 1) as f64 / ny as f64;
                out.push(Rect { x0: w[0], x1: w[1], y0: a, y1: b });
            }
        }
        out
    }
}

struct Cell {
    rect: Rect,
    value: f64,
    error: f64,
    split_x: bool,
    depth: u32,
    id: usize,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then_with(|| o.id.cmp(&self.id))
    }
}

// Degree 7 / degree 5 embedded rule for the square (Genz–Malik, n = 2).
const GM_L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const GM_L4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const GM_L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)
const GM_W: [f64; 5] = [-3816.0 / 19683.0, 980.0 / 6561.0, 1020.0 / 19683.0, 200.0 / 19683.0, 6859.0 / 78732.0];
const GM_WE: [f64; 4] = [-971.0 / 729.0, 245.0 / 486.0, 65.0 / 1458.0, 25.0 / 729.0];

fn rule<F: FnMut(f64, f64) -> Result<f64>>(f: &mut F, r: &Rect) -> Result<(f64, f64, bool)> {
    let (cx, cy) = (0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    let (hx, hy) = (0.5 * (r.x1 - r.x0), 0.5 * (r.y1 - r.y0));
    let vol = 4.0 * hx * hy;
    let f0 = f(cx, cy)?;
    let mut s2 = [0.0; 2];
    let mut s3 = [0.0; 2];
    for (k, (dx, dy)) in [(hx, 0.0), (0.0, hy)].into_iter().enumerate() {
        s2[k] = f(cx + GM_L2 * dx, cy + GM_L2 * dy)? + f(cx - GM_L2 * dx, cy - GM_L2 * dy)?;
        s3[k] = f(cx + GM_L4 * dx, cy + GM_L4 * dy)? + f(cx - GM_L4 * dx, cy - GM_L4 * dy)?;
    }
    let mut s4 = 0.0;
    let mut s5 = 0.0;
    for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        s4 += f(cx + sx * GM_L4 * hx, cy + sy * GM_L4 * hy)?;
        s5 += f(cx + sx * GM_L5 * hx, cy + sy * GM_L5 * hy)?;
    }
    let (a2, a3) = (s2[0] + s2[1], s3[0] + s3[1]);
    let i7 = vol * (GM_W[0] * f0 + GM_W[1] * a2 + GM_W[2] * a3 + GM_W[3] * s4 + GM_W[4] * s5);
    let i5 = vol * (GM_WE[0] * f0 + GM_WE[1] * a2 + GM_WE[2] * a3 + GM_WE[3] * s4);
    let ratio = (GM_L2 / GM_L4).powi(2);
    let d = |k: usize| (s2[k] - 2.0 * f0 - ratio * (s3[k] - 2.0 * f0)).abs();
    let split_x = d(0) >= d(1);
    if !(i7.is_finite() && i5.is_finite()) {
        return Err(Error::numerical("non-finite integrand sample"));
    }
    Ok((i7, (i7 - i5).abs(), split_x))
}

/// Globally adaptive cubature of `f` over a union of rectangles.
///
/// The cell with the largest error is halved along its roughest axis until
/// the summed error meets `max(abs_tol, rel_tol·|I|)`. Ties are broken by
/// creation order, so the result is reproducible bit for bit.
pub fn cubature<F: FnMut(f64, f64) -> Result<f64>>(cells: &[Rect], mut f: F, cfg: &QuadConfig) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Cell> = Vec::new();
    let mut next_id = 0usize;
    let mut make = |rect: Rect, depth: u32, next_id: &mut usize| -> Result<Cell> {
        let (value, error, split_x) = rule(&mut f, &rect)?;
        *next_id += 1;
        Ok(Cell { rect, value, error, split_x, depth, id: *next_id - 1 })
    };
    for r in cells {
        heap.push(make(*r, 0, &mut next_id)?);
    }
    let totals = |heap: &BinaryHeap<Cell>, done: &[Cell]| {
        let mut all: Vec<&Cell> = heap.iter().chain(done.iter()).collect();
        all.sort_by_key(|c| c.id);
        all.iter().fold((0.0, 0.0), |(v, e), c| (v + c.value, e + c.error))
    };
    let (mut value, mut error) = totals(&heap, &done);
    let mut converged = true;
    loop {
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            break;
        }
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        if worst.depth >= cfg.max_depth {
            done.push(worst);
            continue;
        }
        if heap.len() + done.len() + 2 > cfg.max_cells {
            heap.push(worst);
            converged = false;
            break;
        }
        let r = worst.rect;
        let halves = if worst.split_x {
            let m = 0.5 * (r.x0 + r.x1);
            [Rect { x1: m, ..r }, Rect { x0: m, ..r }]
        } else {
            let m = 0.5 * (r.y0 + r.y1);
            [Rect { y1: m, ..r }, Rect { y0: m, ..r }]
        };
        value -= worst.value;
        error -= worst.error;
        for h in halves {
            let c = make(h, worst.depth + 1, &mut next_id)?;
            value += c.value;
            error += c.error;
            heap.push(c);
        }
        if next_id % 256 == 0 {
            (value, error) = totals(&heap, &done);
        }
    }
    let evals = next_id * 17;
    let (value, error) = totals(&heap, &done);
    let converged = converged && error <= cfg.abs_tol.max(cfg.rel_tol * value.abs());
    Ok(Estimate { value, error, evals, converged })
}

/// Breakpoints of the log-gap variable `s = -ln(1 - r)` on `[0, s_max]`.
pub fn log_gap_breaks(s_max: f64, cells: usize) -> Vec<f64> {
    let mut xs = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    xs.retain(|&s| s < s_max);
    xs.truncate(cells.max(1));
    xs.push(s_max);
    xs
}

/// A sample handed to densities: the point and `1 - |z|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: C64,
    pub w: f64,
}

/// `∫_𝔻 density dm` over `|z| ≤ 1 - ε_min`.
pub fn disc_integral<F: FnMut(Sample) -> Result<f64>>(mut density: F, cfg: &QuadConfig) -> Result<Estimate> {
    let cells = Rect::grid(&log_gap_breaks(cfg.s_max(), cfg.radial_cells), cfg.angular_cells, 0.0, TAU);
    cubature(
        &cells,
        |s, t| {
            let gap = (-s).exp();
            let r = 1.0 - gap;
            let w = gap * (2.0 - gap);
            Ok(density(Sample { z: C64::from_polar(r, t), w })? * r * gap / PI)
        },
        cfg,
    )
}

/// Pulls the reference half-disc `{|ζ| < 1, Re ζ ≥ 0}` back onto a box.
#[derive(Debug, Clone, Copy)]
pub struct BoxMap {
    pub rot: C64,
    pub eta: f64,
    pub len: f64,
}

impl BoxMap {
    pub fn new(b: &GeodesicBox) -> Self {
        BoxMap { rot: C64::from_polar(1.0, b.arc.center), eta: b.reference_eta(), len: b.arc.len }
    }

    /// Image point, `1 - |z|²` and the area Jacobian `|ψ'(ζ)|²`.
    pub fn map(&self, zeta: C64, one_minus_abs2_zeta: f64) -> (Sample, f64) {
        let a = 1.0 - self.eta;
        let den = 1.0 + a * zeta;
        let z = self.rot * (zeta + a) / den;
        let m2 = den.norm_sqr();
        let k = self.eta * (2.0 - self.eta);
        (Sample { z, w: k * one_minus_abs2_zeta / m2 }, k * k / (m2 * m2))
    }
}

/// Reference cells on the half-disc in `(s, φ)` with `ρ = 1 - e^{-s}`.
pub fn half_disc_cells(cfg: &QuadConfig) -> Vec<Rect> {
    Rect::grid(&log_gap_breaks(cfg.s_max(), cfg.radial_cells), (cfg.angular_cells / 2).max(1), -FRAC_PI_2, FRAC_PI_2)
}

/// `∫_{S(I)} density dm`, clipped at `ε_min` in the reference coordinates.
pub fn box_integral<F: FnMut(Sample) -> Result<f64>>(b: &GeodesicBox, mut density: F, cfg: &QuadConfig) -> Result<Estimate> {
    if b.arc.len >= 1.0 {
        return disc_integral(density, cfg);
    }
    let map = BoxMap::new(b);
    cubature(
        &half_disc_cells(cfg),
        |s, phi| {
            let gap = (-s).exp();
            let rho = 1.0 - gap;
            let (smp, jac) = map.map(C64::from_polar(rho, phi), gap * (2.0 - gap));
            Ok(density(smp)? * jac * rho * gap / PI)
        },
        cfg,
    )
}

/// `(1/|I|) ∫_{S(I)} density dm`.
pub fn box_average<F: FnMut(Sample) -> Result<f64>>(b: &GeodesicBox, density: F, cfg: &QuadConfig) -> Result<Estimate> {
    let e = box_integral(b, density, cfg)?;
    Ok(Estimate { value: e.value / b.arc.len, error: e.error / b.arc.len, ..e })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: DiscPoint,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Circle(f64),
    Disc,
    Box(GeodesicBox),
}

/// Radius of dyadic ring `j`, clipped at the cutoff.
pub fn ring_gap(j: usize, eps_min: f64) -> f64 {
    0.5f64.powi(j as i32).max(eps_min)
}

/// Number of angles used on dyadic ring `j`.
pub fn ring_angles(j: usize) -> usize {
    8usize << j.min(14)
}

/// Maximum of `sampler` over a deterministic nested grid.
///
/// For the disc the grid is the rings `1 - 2^{-j}`, `j = 0..=resolution`,
/// with `8·2^j` equally spaced angles starting at angle 0. Adding rings only
/// adds samples, so the estimate never decreases under refinement.
pub fn grid_sup<F: FnMut(DiscPoint) -> Result<f64>>(mut sampler: F, region: Region, resolution: usize, eps_min: f64) -> Result<SupEstimate> {
    let mut best = SupEstimate { value: f64::NEG_INFINITY, argmax: DiscPoint { theta: 0.0, gap: 1.0 }, resolution };
    let mut consider = |p: DiscPoint, sampler: &mut F| -> Result<()> {
        let v = sampler(p)?;
        if v > best.value {
            best.value = v;
            best.argmax = p;
        }
        Ok(())
    };
    match region {
        Region::Circle(r) => {
            let n = resolution.max(1);
            for k in 0..n {
                consider(DiscPoint::polar(TAU * k as f64 / n as f64, 1.0 - r)?, &mut sampler)?;
            }
        }
        Region::Disc => {
            consider(DiscPoint { theta: 0.0, gap: 1.0 }, &mut sampler)?;
            for j in 1..=resolution {
                let gap = ring_gap(j, eps_min);
                let n = ring_angles(j);
                for k in 0..n {
                    consider(DiscPoint::polar(TAU * k as f64 / n as f64, gap)?, &mut sampler)?;
                }
                if gap <= eps_min {
                    break;
                }
            }
        }
        Region::Box(b) => {
            let map = BoxMap::new(&b);
            for j in 0..=resolution {
                let gap = if j == 0 { 1.0 } else { ring_gap(j, eps_min) };
                let n = if j == 0 { 1 } else { 2 + ring_angles(j) / 2 };
                for k in 0..n {
                    let phi = if n == 1 { 0.0 } else { -FRAC_PI_2 + PI * k as f64 / (n - 1) as f64 };
                    let (smp, _) = map.map(C64::from_polar(1.0 - gap, phi), gap * (2.0 - gap));
                    let gap_z = smp.w / (1.0 + (1.0 - smp.w).max(0.0).sqrt());
                    if gap_z > 0.0 {
                        consider(DiscPoint::polar(smp.z.arg(), gap_z)?, &mut sampler)?;
                    }
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitTag {
    Vanishes,
    BoundedNonvanishing,
    Unbounded,
    Inconclusive,
}

impl LimitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitTag::Vanishes => "vanishes",
            LimitTag::BoundedNonvanishing => "bounded_nonvanishing",
            LimitTag::Unbounded => "unbounded",
            LimitTag::Inconclusive => "inconclusive",
        }
    }

    /// Vanishing or bounded, i.e. the limsup is finite.
    pub fn is_finite(&self) -> bool {
        matches!(self, LimitTag::Vanishes | LimitTag::BoundedNonvanishing)
    }
}

/// Finite decision rules standing in for a limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Tail values below this count as zero.
    pub vanish: f64,
    /// Tail values above this count as divergent.
    pub blowup: f64,
    /// Log-log slope at or below which the tail is decaying.
    pub slope_decay: f64,
    /// Log-log slope at or above which the tail is growing.
    pub slope_growth: f64,
    /// Log-log slope magnitude below which the tail is flat.
    pub slope_flat: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { vanish: 1e-3, blowup: 1e3, slope_decay: -0.5, slope_growth: 0.5, slope_flat: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitVerdict {
    pub tag: LimitTag,
    /// `(parameter, value)` with the parameter moving toward the boundary.
    pub samples: Vec<(f64, f64)>,
    pub thresholds: Thresholds,
    /// Least-squares slope of `ln v` against `ln log(e/gap)` on the tail.
    pub tail_slope: f64,
    /// The last value is within a factor 10 of a value threshold.
    pub near_threshold: bool,
    /// Samples skipped because the sampler failed there.
    pub skipped: usize,
}

/// Classifies a sampled tail.
///
/// `samples` carry `(gap, value)` with gaps decreasing to 0. The slope test
/// uses the abscissa `log(e/gap)`, so logarithmic growth or decay is caught
/// long before the value thresholds are crossed.
pub fn decide(samples: Vec<(f64, f64)>, th: Thresholds, skipped: usize) -> LimitVerdict {
    let n = samples.len();
    let mut verdict = LimitVerdict { tag: LimitTag::Inconclusive, samples, thresholds: th, tail_slope: f64::NAN, near_threshold: false, skipped };
    if n < 4 {
        return verdict;
    }
    let tail = &verdict.samples[n - (n / 3).max(4).min(n)..];
    let last = tail[tail.len() - 1].1;
    let nonincreasing = tail.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-300);
    let increasing = tail.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
    if tail.iter().all(|p| p.1 == 0.0) {
        verdict.tag = LimitTag::Vanishes;
        verdict.tail_slope = f64::NEG_INFINITY;
        return verdict;
    }
    let pts: Vec<(f64, f64)> = tail.iter().filter(|p| p.1 > 0.0).map(|p| ((1.0 - p.0.ln()).ln(), p.1.ln())).collect();
    let slope = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    verdict.tail_slope = slope;
    let within10 = |x: f64, t: f64| x >= t / 10.0 && x <= t * 10.0;
    verdict.near_threshold = within10(last, th.vanish) || within10(last, th.blowup);
    verdict.tag = if last < th.vanish && nonincreasing {
        LimitTag::Vanishes
    } else if last > th.blowup && increasing {
        LimitTag::Unbounded
    } else if slope <= th.slope_decay {
        LimitTag::Vanishes
    } else if slope >= th.slope_growth {
        LimitTag::Unbounded
    } else if slope.abs() < th.slope_flat && last >= th.vanish && last <= th.blowup {
        LimitTag::BoundedNonvanishing
    } else {
        LimitTag::Inconclusive
    };
    verdict
}

/// Radial schedule `r_j = 1 - 2^{-j}`, `j = 4..=j_max`, clipped at `ε_min`.
pub fn radial_schedule(j_max: usize, eps_min: f64) -> Vec<f64> {
    let mut gaps = Vec::new();
    for j in 4..=j_max {
        let g = ring_gap(j, eps_min);
        if gaps.last().is_some_and(|&l| g >= l) {
            break;
        }
        gaps.push(g);
    }
    gaps
}

/// Limit of `sampler(gap)` as the gap `1 - r` goes to 0.
pub fn radial_limit<F: FnMut(f64) -> Result<f64>>(mut sampler: F, j_max: usize, eps_min: f64, th: Thresholds) -> LimitVerdict {
    let mut samples = Vec::new();
    let mut skipped = 0;
    for gap in radial_schedule(j_max, eps_min) {
        match sampler(gap) {
            Ok(v) if v.is_finite() => samples.push((gap, v)),
            _ => skipped += 1,
        }
    }
    decide(samples, th, skipped)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(20))
}

fn gl_segment<F: Fn(C64) -> Result<C64> + ?Sized>(f: &F, a: C64, b: C64) -> Result<C64> {
    let (x, w) = gl20();
    let (mid, half) = ((a + b) * 0.5, (b - a) * 0.5);
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        acc += f(mid + half * *xi)? * *wi;
    }
    Ok(acc * half)
}

/// `∫_{[a,b]} f(ζ) dζ` by adaptive composite 20-point Gauss–Legendre.
pub fn segment_integral<F: Fn(C64) -> Result<C64> + ?Sized>(f: &F, a: C64, b: C64, rel_tol: f64) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut total = C64::new(0.0, 0.0);
    let mut stack = vec![(a, b, gl_segment(f, a, b)?, 0u32)];
    let scale = (b - a).norm();
    while let Some((p, q, whole, depth)) = stack.pop() {
        let m = (p + q) * 0.5;
        let (l, r) = (gl_segment(f, p, m)?, gl_segment(f, m, q)?);
        let err = (l + r - whole).norm();
        let local_tol = rel_tol * (l + r).norm().max(1e-300) + 1e-15 * (q - p).norm() / scale;
        if err <= local_tol || depth >= 40 {
            if depth >= 40 && err > 1e3 * local_tol {
                return Err(Error::domain("line integral does not converge (pole on the segment?)"));
            }
            total += l + r;
        } else {
            stack.push((m, q, r, depth + 1));
            stack.push((p, m, l, depth + 1));
        }
    }
    Ok(total)
}

/// Line integral of an expression along the straight segment `[z0, z1]`.
pub fn line_integral(expr: &HoloExpr, z0: C64, z1: C64) -> Result<C64> {
    segment_integral(&|z| expr.eval(z), z0, z1, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::{box_of, Arc};

    #[test]
    fn gl_nodes() {
        let (x, w) = gauss_legendre(20);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn disc_values() {
        let cfg = QuadConfig::default().with_rel_tol(1e-11);
        let one = disc_integral(|_| Ok(1.0), &cfg).unwrap();
        assert!((one.value - 1.0).abs() < 1e-9, "{one:?}");
        let w = disc_integral(|s| Ok(s.w), &cfg).unwrap();
        assert!((w.value - 0.5).abs() < 1e-9, "{w:?}");
    }

    #[test]
    fn box_half_and_zero() {
        let cfg = QuadConfig::default().with_rel_tol(1e-11);
        let full = box_integral(&box_of(Arc::full()), |s| Ok(s.w), &cfg).unwrap();
        assert!((full.value - 0.5).abs() < 1e-9);
        let half = box_integral(&box_of(Arc::new(1.0, 0.5).unwrap()), |_| Ok(1.0), &cfg).unwrap();
        assert!((half.value - 0.5).abs() < 1e-9, "{half:?}");
        let zero = box_integral(&box_of(Arc::new(0.0, 0.25).unwrap()), |_| Ok(0.0), &cfg).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn line_examples() {
        let one = HoloExpr::parse("1").unwrap();
        assert!((line_integral(&one, C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap().re - 0.5).abs() < 1e-15);
        let k = HoloExpr::parse("1/(1-z)").unwrap();
        let v = line_integral(&k, C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn radial_examples() {
        let th = Thresholds::default();
        let v = radial_limit(|g| { let w = g * (2.0 - g); Ok(w * (1.0 / w).ln()) }, 40, 1e-12, th);
        assert_eq!(v.tag, LimitTag::Vanishes);
        let v = radial_limit(|g| { let w = g * (2.0 - g); Ok((2.0 - g) / g * (1.0 / w).ln()) }, 40, 1e-12, th);
        assert_eq!(v.tag, LimitTag::Unbounded);
        let v = radial_limit(|_| Ok(1.0), 40, 1e-12, th);
        assert_eq!(v.tag, LimitTag::BoundedNonvanishing);
    }
}
