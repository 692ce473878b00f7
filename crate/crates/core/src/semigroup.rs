//! Generators, Berkson–Porta construction, classification, flows of
//! `∂φ_t/∂t = G(φ_t)`, the Koenigs function and the γ-symbol.

use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::HoloExpr;
use crate::func::{Func, Holo};
use crate::quad::{radial_limit, segment_integral, LimitTag, Thresholds};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Serialize)]
pub struct BerksonPorta {
    pub tau: C64,
    pub p: HoloExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Elliptic => "elliptic",
            Kind::Hyperbolic => "hyperbolic",
            Kind::Parabolic => "parabolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Kind,
    /// Denjoy–Wolff point.
    pub tau: C64,
    /// Spectral value.
    pub lambda: C64,
}

/// Integration controls for the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    pub atol: f64,
    pub rtol: f64,
    /// Trajectories may not come closer than this to the circle.
    pub eps_min: f64,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { atol: 1e-10, rtol: 1e-10, eps_min: 1e-12, max_steps: 1_000_000 }
    }
}

/// Infinitesimal generator `G` of a semigroup.
#[derive(Debug)]
pub struct Generator {
    pub g: HoloExpr,
    pub dg: HoloExpr,
    d2g: HoloExpr,
    pub bp: Option<BerksonPorta>,
    class: OnceLock<std::result::Result<Classification, Error>>,
}

impl Clone for Generator {
    fn clone(&self) -> Self {
        let class = OnceLock::new();
        if let Some(c) = self.class.get() {
            let _ = class.set(c.clone());
        }
        Generator { g: self.g.clone(), dg: self.dg.clone(), d2g: self.d2g.clone(), bp: self.bp.clone(), class }
    }
}

/// Sample grid used for admissibility of the Herglotz factor: 20 radii
/// approaching the circle times 20 angles.
pub fn herglotz_grid() -> Vec<C64> {
    let mut pts = Vec::with_capacity(400);
    for i in 0..20 {
        let r = 1.0 - 0.5f64.powf(0.5 + i as f64);
        for k in 0..20 {
            pts.push(C64::from_polar(r, TAU * (k as f64 + 0.25) / 20.0));
        }
    }
    pts
}

impl Generator {
    pub fn new(g: HoloExpr) -> Result<Self> {
        if g.is_constant() && g.eval(ZERO)? == ZERO {
            return Err(Error::domain("the zero vector field generates no semigroup"));
        }
        let dg = g.differentiate();
        let d2g = dg.differentiate();
        Ok(Generator { g, dg, d2g, bp: None, class: OnceLock::new() })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(HoloExpr::parse(src)?)
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        self.g.eval(z)
    }

    pub fn deriv(&self, z: C64) -> Result<C64> {
        self.dg.eval(z)
    }

    pub fn classification(&self) -> Result<Classification> {
        self.class.get_or_init(|| classify_uncached(self)).clone()
    }

    pub fn label(&self) -> String {
        self.g.to_string()
    }
}

/// `G(z) = (z - τ)(τ̄z - 1)p(z)`.
pub fn berkson_porta(tau: C64, p: HoloExpr) -> Result<Generator> {
    if tau.norm() > 1.0 + 1e-15 {
        return Err(Error::domain(format!("Denjoy-Wolff point {tau} outside the closed disc")));
    }
    for z in herglotz_grid() {
        let v = p.eval(z)?;
        if v.re < -1e-9 {
            return Err(Error::Admissibility(format!("Re p({z}) = {} < 0", v.re)));
        }
    }
    let z = HoloExpr::z();
    let t = HoloExpr::constant(tau);
    let g = (&z - &t) * (&HoloExpr::constant(tau.conj()) * &z - HoloExpr::real(1.0)) * p.clone();
    let mut gen = Generator::new(g)?;
    gen.bp = Some(BerksonPorta { tau, p });
    Ok(gen)
}

fn newton(gen: &Generator, seed: C64) -> Option<C64> {
    let mut z = seed;
    let mut gz = gen.eval(z).ok()?;
    for _ in 0..100 {
        if gz.norm() < 1e-15 {
            return Some(z);
        }
        let d = gen.deriv(z).ok()?;
        if d.norm() == 0.0 {
            return None;
        }
        let step = gz / d;
        let mut s = 1.0;
        loop {
            let cand = z - step * s;
            if cand.norm() < 1.0 {
                if let Ok(gc) = gen.eval(cand) {
                    if gc.norm() < gz.norm() || s < 1e-6 {
                        z = cand;
                        gz = gc;
                        break;
                    }
                }
            }
            s *= 0.5;
            if s < 1e-10 {
                return None;
            }
        }
        if (step * s).norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    (gz.norm() < 1e-12).then_some(z)
}

fn interior_zero(gen: &Generator) -> Option<C64> {
    let mut seeds = vec![ZERO];
    for i in 0..7 {
        for k in 0..16 {
            seeds.push(C64::from_polar((i as f64 + 1.0) / 8.0, TAU * k as f64 / 16.0));
        }
    }
    // A zero of a generator inside the disc is simple; degenerate roots are
    // boundary points approached from inside.
    seeds
        .into_iter()
        .filter_map(|s| newton(gen, s))
        .find(|z| z.norm() < 1.0 - 1e-8 && gen.deriv(*z).map_or(false, |d| d.norm() > 1e-6))
}

/// Richardson extrapolation of `q(h)` to `h = 0` from halving steps.
fn extrapolate<F: FnMut(f64) -> Result<C64>>(mut q: F, h0: f64, levels: usize) -> Result<C64> {
    let mut table: Vec<C64> = Vec::new();
    for k in 0..levels {
        let mut v = q(h0 / f64::powi(2.0, k as i32))?;
        for (m, prev) in table.iter_mut().enumerate() {
            let f = f64::powi(2.0, m as i32 + 1);
            let nv = (v * f - *prev) / (f - 1.0);
            *prev = v;
            v = nv;
        }
        table.push(v);
    }
    Ok(*table.last().unwrap_or(&ZERO))
}

fn boundary_point(gen: &Generator) -> Result<C64> {
    if let Some(bp) = &gen.bp {
        return Ok(bp.tau / bp.tau.norm());
    }
    let cfg = FlowConfig { eps_min: 1e-9, ..FlowConfig::default() };
    let mut t = 1.0;
    while t < 1e9 {
        let traj = flow(gen, ZERO, t, &cfg)?;
        let w = *traj.points.last().unwrap_or(&ZERO);
        if w.norm() > 1.0 - 1e-6 {
            return Ok(w / w.norm());
        }
        t *= 8.0;
    }
    Err(Error::Inconclusive("orbit of 0 does not approach the circle".into()))
}

fn classify_uncached(gen: &Generator) -> Result<Classification> {
    if let Some(tau) = interior_zero(gen) {
        let lambda = -gen.deriv(tau)?;
        if lambda.re < -1e-9 || lambda.norm() < 1e-14 {
            return Err(Error::Admissibility(format!("interior zero {tau} has spectral value {lambda}")));
        }
        return Ok(Classification { kind: Kind::Elliptic, tau, lambda });
    }
    let tau = boundary_point(gen)?;
    let verdict = radial_limit(
        |gap| Ok(gen.eval(tau * (1.0 - gap))?.norm() / gap),
        40,
        1e-12,
        Thresholds::default(),
    );
    match verdict.tag {
        LimitTag::Vanishes => Ok(Classification { kind: Kind::Parabolic, tau, lambda: ZERO }),
        LimitTag::BoundedNonvanishing => {
            let lam = extrapolate(|h| Ok(-gen.eval(tau * (1.0 - h))? / (-h * tau)), 1e-3, 5)?;
            if lam.re <= 0.0 {
                return Err(Error::Inconclusive(format!("boundary spectral value {lam} is not positive")));
            }
            Ok(Classification { kind: Kind::Hyperbolic, tau, lambda: C64::new(lam.re, 0.0) })
        }
        other => Err(Error::Inconclusive(format!(
            "boundary analysis at {tau} gave {} for |G(rτ)|/(1-r)",
            other.as_str()
        ))),
    }
}

pub fn classify(gen: &Generator) -> Result<Classification> {
    gen.classification()
}

/// Sampled solution of the Cauchy problem.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<C64>,
    /// `∂φ_t/∂z` at `z0`.
    pub derivs: Vec<C64>,
    /// Accepted step sizes.
    pub steps: Vec<f64>,
    /// `|G(φ_t(z0)) - G(z0)·∂φ_t/∂z|` at each sample.
    pub residuals: Vec<f64>,
}

// Dormand–Prince 5(4).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [C64; 2];

fn rhs(gen: &Generator, y: &State) -> Result<State> {
    Ok([gen.eval(y[0])?, gen.deriv(y[0])? * y[1]])
}

/// Integrates the flow and its variational equation, landing exactly on
/// every requested time (which must be nondecreasing and nonnegative).
pub fn flow_times(gen: &Generator, z0: C64, times: &[f64], cfg: &FlowConfig) -> Result<Trajectory> {
    if z0.norm() >= 1.0 {
        return Err(Error::domain(format!("initial point {z0} outside the disc")));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("times must be nonnegative and nondecreasing"));
    }
    let g0 = gen.eval(z0)?;
    // Starting points already inside the cutoff get a guard halfway to the circle.
    let guard = cfg.eps_min.min(0.5 * (1.0 - z0.norm()));
    let mut traj = Trajectory { times: vec![], points: vec![], derivs: vec![], steps: vec![], residuals: vec![] };
    let mut y: State = [z0, ONE];
    let mut t = 0.0;
    let mut k1 = rhs(gen, &y)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut h = horizon.clamp(1e-6, 0.1);
    let mut err_old: f64 = 1e-4;
    let mut steps = 0usize;
    let record = |traj: &mut Trajectory, t: f64, y: &State| -> Result<()> {
        traj.times.push(t);
        traj.points.push(y[0]);
        traj.derivs.push(y[1]);
        traj.residuals.push((gen.eval(y[0])? - g0 * y[1]).norm());
        Ok(())
    };
    for &target in times {
        while t < target {
            if steps >= cfg.max_steps {
                return Err(Error::numerical("flow step budget exhausted"));
            }
            steps += 1;
            let last = t + h >= target;
            let hh = if last { target - t } else { h };
            let mut k = [k1, [ZERO; 2], [ZERO; 2], [ZERO; 2], [ZERO; 2], [ZERO; 2], [ZERO; 2]];
            let mut stage_ok = true;
            let mut ynew = y;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    for c in 0..2 {
                        ys[c] += kj[c] * (hh * A[s][j]);
                    }
                }
                if s == 6 && ys[0].norm() >= 1.0 - guard {
                    stage_ok = false;
                    break;
                }
                match rhs(gen, &ys) {
                    Ok(v) => k[s] = v,
                    Err(_) => {
                        stage_ok = false;
                        break;
                    }
                }
                if s == 6 {
                    ynew = ys;
                }
            }
            let _ = C;
            let err = if stage_ok {
                let mut e: f64 = 0.0;
                for c in 0..2 {
                    let mut d = ZERO;
                    for (s, ks) in k.iter().enumerate() {
                        d += ks[c] * E[s];
                    }
                    let sc = cfg.atol + cfg.rtol * y[c].norm().max(ynew[c].norm());
                    e = e.max((d * hh).norm() / sc);
                }
                e
            } else {
                f64::INFINITY
            };
            if err <= 1.0 {
                t = if last { target } else { t + hh };
                y = ynew;
                k1 = k[6];
                traj.steps.push(hh);
                let fac = (err.max(1e-10).powf(0.17) * err_old.powf(-0.04) / 0.9).clamp(0.1, 5.0);
                err_old = err.max(1e-4);
                if !last {
                    h = hh / fac;
                }
            } else {
                let fac = if err.is_finite() { (err.powf(0.2) / 0.9).min(10.0) } else { 4.0 };
                h = hh / fac;
                if h < 1e-14 * (1.0 + t) {
                    return Err(Error::numerical(format!(
                        "trajectory from {z0} reached the boundary cutoff near t = {t}"
                    )));
                }
            }
        }
        record(&mut traj, t, &y)?;
    }
    Ok(traj)
}

pub fn flow(gen: &Generator, z0: C64, t: f64, cfg: &FlowConfig) -> Result<Trajectory> {
    flow_times(gen, z0, &[t], cfg)
}

/// `φ_t(z)` and `∂φ_t/∂z`.
pub fn flow_point(gen: &Generator, z0: C64, t: f64, cfg: &FlowConfig) -> Result<(C64, C64)> {
    let tr = flow(gen, z0, t, cfg)?;
    Ok((tr.points[0], tr.derivs[0]))
}

/// Evaluates `k` near a removable singularity at `tau` by Cauchy's formula
/// on a small circle.
fn removable<F: Fn(C64) -> Result<C64>>(k: &F, tau: C64, radius: f64, z: C64) -> Result<C64> {
    if (z - tau).norm() >= 0.25 * radius {
        return k(z);
    }
    const N: usize = 32;
    let mut acc = ZERO;
    for j in 0..N {
        let u = C64::from_polar(radius, TAU * (j as f64 + 0.5) / N as f64);
        acc += k(tau + u)? * u / (tau + u - z);
    }
    Ok(acc / N as f64)
}

fn cauchy_radius(tau: C64) -> f64 {
    (0.25 * (1.0 - tau.norm())).min(1e-2)
}

/// Koenigs function of the semigroup.
pub struct Koenigs {
    gen: Arc<Generator>,
    class: Classification,
}

impl Koenigs {
    fn log_kernel(&self, z: C64) -> Result<C64> {
        let (tau, lam) = (self.class.tau, self.class.lambda);
        removable(&|w: C64| Ok(-lam / self.gen.eval(w)? - 1.0 / (w - tau)), tau, cauchy_radius(tau), z)
    }
}

impl Holo for Koenigs {
    fn value(&self, z: C64) -> Result<C64> {
        let tau = self.class.tau;
        match self.class.kind {
            Kind::Elliptic => {
                let s = segment_integral(&|w| self.log_kernel(w), tau, z, 1e-13)?;
                Ok((z - tau) * s.exp())
            }
            _ => segment_integral(&|w| self.deriv(w), ZERO, z, 1e-13),
        }
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        let g = self.gen.eval(z)?;
        match self.class.kind {
            Kind::Elliptic => {
                if (z - self.class.tau).norm() < 0.25 * cauchy_radius(self.class.tau) {
                    // h'(z) = h(z)/(z-τ) · exp-free form of (z-τ)(-λ/G).
                    let k = self.log_kernel(z)?;
                    let s = segment_integral(&|w| self.log_kernel(w), self.class.tau, z, 1e-13)?;
                    Ok(s.exp() * (1.0 + (z - self.class.tau) * k))
                } else {
                    Ok(self.value(z)? * (-self.class.lambda / g))
                }
            }
            _ => Ok(C64::new(0.0, 1.0) / g),
        }
    }
    fn label(&self) -> String {
        format!("koenigs({})", self.gen.label())
    }
}

pub fn koenigs(gen: Arc<Generator>) -> Result<Func> {
    let class = gen.classification()?;
    Ok(Arc::new(Koenigs { gen, class }))
}

/// The γ-symbol: `γ' = (z-τ)/G` for elliptic semigroups, the Koenigs
/// function otherwise.
pub struct Gamma {
    gen: Arc<Generator>,
    class: Classification,
}

impl Holo for Gamma {
    fn value(&self, z: C64) -> Result<C64> {
        segment_integral(&|w| self.deriv(w), self.class.tau, z, 1e-13)
    }
    fn deriv(&self, z: C64) -> Result<C64> {
        let tau = self.class.tau;
        removable(&|w: C64| Ok((w - tau) / self.gen.eval(w)?), tau, cauchy_radius(tau), z)
    }
    fn label(&self) -> String {
        format!("gamma({})", self.gen.label())
    }
}

pub fn gamma_symbol(gen: Arc<Generator>) -> Result<Func> {
    let class = gen.classification()?;
    match class.kind {
        Kind::Elliptic => Ok(Arc::new(Gamma { gen, class })),
        _ => koenigs(gen),
    }
}

/// `γ'` for either kind, the integrand of the logarithmic mean oscillation
/// test. With `printed` the boundary form `i/G` is used regardless of kind.
pub fn gamma_prime(gen: &Generator, z: C64, printed: bool) -> Result<C64> {
    let class = gen.classification()?;
    if printed || class.kind != Kind::Elliptic {
        return Ok(C64::new(0.0, 1.0) / gen.eval(z)?);
    }
    let tau = class.tau;
    removable(&|w: C64| Ok((w - tau) / gen.eval(w)?), tau, cauchy_radius(tau), z)
}

impl Generator {
    /// Second derivative, used by consistency checks.
    pub fn deriv2(&self, z: C64) -> Result<C64> {
        self.d2g.eval(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn berkson_porta_examples() {
        let z = C64::new(0.3, -0.2);
        let g = berkson_porta(ZERO, HoloExpr::real(1.0)).unwrap();
        assert!(close(g.eval(z).unwrap(), -z, 1e-15));
        let g = berkson_porta(ZERO, HoloExpr::constant(C64::new(0.0, -1.0))).unwrap();
        assert!(close(g.eval(z).unwrap(), C64::new(0.0, 1.0) * z, 1e-15));
        let g = berkson_porta(ONE, HoloExpr::real(1.0)).unwrap();
        assert!(close(g.eval(z).unwrap(), (1.0 - z) * (1.0 - z), 1e-15));
        assert!(matches!(berkson_porta(ZERO, HoloExpr::real(-1.0)), Err(Error::Admissibility(_))));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&Generator::parse("-z").unwrap()).unwrap();
        assert_eq!((c.kind, c.tau, c.lambda), (Kind::Elliptic, ZERO, ONE));
        let c = classify(&Generator::parse("(1-z)^2").unwrap()).unwrap();
        assert_eq!(c.kind, Kind::Parabolic);
        assert!(close(c.tau, ONE, 1e-12));
        let c = classify(&Generator::parse("z^2-1").unwrap()).unwrap();
        assert_eq!(c.kind, Kind::Hyperbolic);
        assert!(close(c.tau, -ONE, 1e-12));
        assert!((c.lambda.re - 2.0).abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn flow_examples() {
        let cfg = FlowConfig::default();
        let (w, j) = flow_point(&Generator::parse("-z").unwrap(), C64::new(0.5, 0.0), 1.0, &cfg).unwrap();
        assert!(close(w, C64::new(0.5 * (-1f64).exp(), 0.0), 1e-9));
        assert!(close(j, C64::new((-1f64).exp(), 0.0), 1e-9));
        let (w, _) = flow_point(&Generator::parse("(1-z)^2").unwrap(), ZERO, 1.0, &cfg).unwrap();
        assert!(close(w, C64::new(0.5, 0.0), 1e-9));
        let (w, _) = flow_point(&Generator::parse("z^2-1").unwrap(), ZERO, 1.0, &cfg).unwrap();
        assert!(close(w, C64::new(-1f64.tanh(), 0.0), 1e-9));
    }

    #[test]
    fn koenigs_examples() {
        let h = koenigs(Arc::new(Generator::parse("-z").unwrap())).unwrap();
        assert!(close(h.value(C64::new(0.5, 0.0)).unwrap(), C64::new(0.5, 0.0), 1e-12));
        assert!(close(h.deriv(ZERO).unwrap(), ONE, 1e-12));
        let h = koenigs(Arc::new(Generator::parse("(1-z)^2").unwrap())).unwrap();
        assert!(close(h.value(C64::new(0.5, 0.0)).unwrap(), C64::new(0.0, 1.0), 1e-12));
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_symbol(Arc::new(Generator::parse("-z").unwrap())).unwrap();
        let z = C64::new(0.3, 0.4);
        assert!(close(g.deriv(z).unwrap(), -ONE, 1e-13));
        assert!(close(g.value(z).unwrap(), -z, 1e-13));
        let g = gamma_symbol(Arc::new(Generator::parse("-z*(1+z)/(1-z)").unwrap())).unwrap();
        assert!(close(g.deriv(ZERO).unwrap(), -ONE, 1e-12));
        assert!(close(g.deriv(z).unwrap(), -(1.0 - z) / (1.0 + z), 1e-12));
    }
}
