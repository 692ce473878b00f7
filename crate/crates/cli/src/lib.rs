//! Argument handling and report assembly for the `holoflow` binary.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use holoflow_core::construct::{self, ConstructConfig, ConstructionState, ExtPoint, Outcome};
use holoflow_core::corpus;
use holoflow_core::expr::HoloExpr;
use holoflow_core::func::{ExprFn, Func};
use holoflow_core::semigroup::{self, berkson_porta, FlowConfig, Generator};
use holoflow_core::spaces::{self, Space, SpaceConfig, Weight};
use holoflow_core::volterra;
use holoflow_core::xnum::{XR, DEFAULT_PRECISION_BITS};
use holoflow_core::{Error, Result};

pub const SCHEMA: &str = "holoflow-report";
pub const SCHEMA_VERSION: u32 = 1;
pub const PRECISION_ENV: &str = "HOLOFLOW_PRECISION_BITS";

#[derive(Parser, Debug)]
#[command(name = "holoflow", version, about = "Semigroups of holomorphic self-maps of the disc: flows, seminorms, verdicts and constructions")]
pub struct Cli {
    /// Relative tolerance of area cubature.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Dyadic depth J of Bloch grids and BMOA arc families.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Boundary cutoff for area integrals and flows.
    #[arg(long, global = true)]
    pub eps_min: Option<f64>,
    /// Write plot series as CSV (series,parameter,value) to this path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SpaceArg {
    Bloch,
    Bmoa,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::Bloch => Space::Bloch,
            SpaceArg::Bmoa => Space::Bmoa,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum WeightArg {
    None,
    Log,
}

impl From<WeightArg> for Weight {
    fn from(w: WeightArg) -> Weight {
        match w {
            WeightArg::None => Weight::One,
            WeightArg::Log => Weight::log(),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum WhichArg {
    Lvb,
    Lvmo,
    Logbloch,
    Lbmo,
}

#[derive(clap::Args, Debug, Clone)]
pub struct GenArgs {
    /// Generator G as an expression in z.
    #[arg(long, short = 'g', allow_hyphen_values = true)]
    pub generator: Option<String>,
    /// Denjoy-Wolff point for a Berkson-Porta generator.
    #[arg(long, requires = "bp_p", allow_hyphen_values = true)]
    pub bp_tau: Option<String>,
    /// Herglotz factor p for a Berkson-Porta generator.
    #[arg(long, requires = "bp_tau", allow_hyphen_values = true)]
    pub bp_p: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kind, Denjoy-Wolff point and spectral value of a generator.
    Classify(GenArgs),
    /// Flow of the Cauchy problem from z0.
    Flow {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        /// Times (comma separated, nondecreasing).
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Koenigs function at z.
    Koenigs {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Gamma symbol and its derivative at z.
    Gamma {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Use the boundary form i/G for the derivative.
        #[arg(long)]
        printed: bool,
    },
    /// Bloch or BMOA seminorm, optionally log-weighted.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, value_enum, default_value = "none")]
        weight: WeightArg,
    },
    /// Vanishing verdict (little-o space membership).
    Vanishing {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, value_enum, default_value = "none")]
        weight: WeightArg,
    },
    /// Boundary condition on a generator.
    Condition {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, value_enum)]
        which: WhichArg,
        #[arg(long)]
        printed: bool,
    },
    /// Minimality prediction for the maximal subspace of strong continuity.
    Minimality(GenArgs),
    /// Volterra operator T_g: point value, image seminorm or boundedness probe.
    Volterra {
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, value_enum, default_value = "bmoa")]
        space: SpaceArg,
        /// Run the boundedness probe over the standard test family.
        #[arg(long)]
        probe: bool,
    },
    /// Continuity probe of the composition semigroup at f.
    Sarason {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum, default_value = "bmoa")]
        space: SpaceArg,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01, 0.001])]
        times: Vec<f64>,
    },
    /// Recursive building-block construction.
    Construct {
        #[arg(long, value_enum, default_value = "bmoa")]
        space: SpaceArg,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "sqrt(log(e/(1-z)))")]
        g: String,
        #[arg(long, default_value_t = 0.05)]
        tol_c: f64,
        /// Resume from a saved state document.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Certify the building block at w.
    BlockVerify {
        /// Block center as a complex number.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "gap")]
        w: Option<String>,
        /// Gap 1-|w| as a decimal (may be far below double range).
        #[arg(long)]
        gap: Option<String>,
        /// Angle of w in turns, used with --gap.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        turn: f64,
    },
    /// Run the built-in corpus end to end.
    Corpus,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Flow { .. } => "flow",
            Command::Koenigs { .. } => "koenigs",
            Command::Gamma { .. } => "gamma",
            Command::Norm { .. } => "norm",
            Command::Vanishing { .. } => "vanishing",
            Command::Condition { .. } => "condition",
            Command::Minimality(_) => "minimality",
            Command::Volterra { .. } => "volterra",
            Command::Sarason { .. } => "sarason",
            Command::Construct { .. } => "construct",
            Command::BlockVerify { .. } => "block-verify",
            Command::Corpus => "corpus",
        }
    }
}

/// Every knob that can influence a report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub spaces: SpaceConfig,
    pub flow: FlowConfig,
    pub construct: ConstructConfig,
    pub precision_bits: usize,
    pub format: &'static str,
    pub csv: Option<String>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut spaces = SpaceConfig::default();
        let mut flow = FlowConfig::default();
        if let Some(r) = cli.rel_tol {
            spaces.quad.rel_tol = r;
        }
        if let Some(d) = cli.depth {
            spaces.bloch_depth = d;
            spaces.bmoa_depth = d;
        }
        if let Some(e) = cli.eps_min {
            spaces.quad.eps_min = e;
            flow.eps_min = e;
        }
        spaces.quad.validate()?;
        let precision_bits = match std::env::var(PRECISION_ENV) {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&p| p >= 64)
                .ok_or_else(|| Error::domain(format!("{PRECISION_ENV} must be an integer >= 64, got {s:?}")))?,
            Err(_) => DEFAULT_PRECISION_BITS,
        };
        let mut construct = ConstructConfig { precision_bits, ..ConstructConfig::default() };
        if let Command::Construct { steps, tol_c, .. } = &cli.command {
            construct.n_max = *steps;
            construct.tol_c = *tol_c;
        }
        Ok(RunConfig {
            spaces,
            flow,
            construct,
            precision_bits,
            format: "json",
            csv: cli.csv.as_ref().map(|p| p.display().to_string()),
        })
    }
}

/// A plot series row: `(series, parameter, value)`.
pub type Row = (String, f64, f64);

/// Result of one invocation.
pub struct Outcome_ {
    pub code: i32,
    pub json: String,
    pub rows: Vec<Row>,
}

fn complex(s: &str) -> Result<C64> {
    let e = HoloExpr::parse(s)?;
    let a = e.eval(C64::new(0.0, 0.0))?;
    let b = e.eval(C64::new(0.5, 0.25))?;
    if a != b {
        return Err(Error::domain(format!("{s:?} is not a constant")));
    }
    Ok(a)
}

fn generator(a: &GenArgs) -> Result<Generator> {
    match (&a.generator, &a.bp_tau, &a.bp_p) {
        (Some(g), None, None) => Generator::parse(g),
        (None, Some(t), Some(p)) => berkson_porta(complex(t)?, HoloExpr::parse(p)?),
        _ => Err(Error::domain("give either --generator or both --bp-tau and --bp-p")),
    }
}

fn func(s: &str) -> Result<Func> {
    Ok(ExprFn::parse(s)?.handle())
}

/// Real values print as numbers, others as `[re, im]`.
fn cval(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::numerical(format!("serializing report: {e}")))
}

/// Rewrites every floating-point number as a decimal string with 17
/// significant digits. Integers are left alone.
pub fn render_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(a) => Value::Array(a.into_iter().map(render_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, render_numbers(v))).collect()),
        other => other,
    }
}

fn execute(cmd: &Command, cfg: &RunConfig, rows: &mut Vec<Row>) -> Result<(Value, i32)> {
    let sc = &cfg.spaces;
    let ok = |v: Value| Ok((v, 0));
    match cmd {
        Command::Classify(a) => {
            let g = generator(a)?;
            let c = semigroup::classify(&g)?;
            ok(json!({"generator": g.label(), "kind": c.kind.as_str(), "tau": cval(c.tau), "lambda": cval(c.lambda)}))
        }
        Command::Flow { gen, z0, t } => {
            let g = generator(gen)?;
            let tr = semigroup::flow_times(&g, complex(z0)?, t, &cfg.flow)?;
            for (t, z) in tr.times.iter().zip(&tr.points) {
                rows.push(("flow_re".into(), *t, z.re));
                rows.push(("flow_im".into(), *t, z.im));
            }
            let last = *tr.points.last().unwrap_or(&complex(z0)?);
                        ok(json!({"generator": g.label(), "value": cval(last), "trajectory": to_value(&tr)?}))
        }
        Command::Koenigs { gen, z } => {
            let g = Arc::new(generator(gen)?);
            let h = semigroup::koenigs(g.clone())?;
            let z = complex(z)?;
            ok(json!({"generator": g.label(), "classification": to_value(&g.classification()?)?, "z": cval(z), "value": cval(h.value(z)?), "derivative": cval(h.deriv(z)?)}))
        }
        Command::Gamma { gen, z, printed } => {
            let g = Arc::new(generator(gen)?);
            let s = semigroup::gamma_symbol(g.clone())?;
            let z = complex(z)?;
            ok(json!({"generator": g.label(), "z": cval(z), "value": cval(s.value(z)?), "derivative": cval(semigroup::gamma_prime(&g, z, *printed)?), "printed": printed}))
        }
        Command::Norm { f, space, weight } => {
            let h = func(f)?;
            let w: Weight = (*weight).into();
            let r = volterra::seminorm(h.as_ref(), (*space).into(), &w, sc)?;
            for (j, v) in r.history.iter().enumerate() {
                rows.push(("history".into(), j as f64, *v));
            }
            ok(json!({"f": h.label(), "report": to_value(&r)?}))
        }
        Command::Vanishing { f, space, weight } => {
            let h = func(f)?;
            let w: Weight = (*weight).into();
            let v = match Space::from(*space) {
                Space::Bloch => spaces::bloch_vanishing(h.as_ref(), &w, sc),
                Space::Bmoa => spaces::bmoa_vanishing(h.as_ref(), &w, sc)?,
            };
            for (p, x) in &v.samples {
                rows.push(("samples".into(), *p, *x));
            }
            ok(json!({"f": h.label(), "verdict": v.tag.as_str(), "report": to_value(&v)?}))
        }
        Command::Condition { gen, which, printed } => {
            let g = generator(gen)?;
            let r = match which {
                WhichArg::Lvb => spaces::lvb_check(&g, sc),
                WhichArg::Logbloch => spaces::logbloch_check(&g, sc),
                WhichArg::Lvmo => spaces::lvmo_check(&g, *printed, sc)?,
                WhichArg::Lbmo => spaces::lbmo_check(&g, *printed, sc)?,
            };
            for (p, x) in &r.verdict.samples {
                rows.push(("samples".into(), *p, *x));
            }
            ok(json!({"generator": g.label(), "verdict": r.verdict.tag.as_str(), "report": to_value(&r)?}))
        }
        Command::Minimality(a) => {
            let g = generator(a)?;
            let m = spaces::minimality(&g, sc)?;
            ok(json!({
                "generator": g.label(),
                "elliptic": m.elliptic,
                "lvb": m.lvb.as_str(),
                "lvmo": m.lvmo.as_str(),
                "minimal": m.minimal,
                "report": to_value(&m)?,
            }))
        }
        Command::Volterra { g, f, z, space, probe } => {
            let gf = func(g)?;
            let space: Space = (*space).into();
            let mut out = serde_json::Map::new();
            out.insert("g".into(), json!(gf.label()));
            if let Some(f) = f {
                let ff = func(f)?;
                let t = volterra::volterra_apply(gf.clone(), ff.clone());
                if let Some(z) = z {
                    let z = complex(z)?;
                    out.insert("z".into(), cval(z));
                    out.insert("value".into(), cval(t.value(z)?));
                    out.insert("derivative".into(), cval(t.deriv(z)?));
                }
                out.insert("f".into(), json!(ff.label()));
                out.insert("seminorm".into(), to_value(&volterra::seminorm(t.as_ref(), space, &Weight::One, sc)?)?);
            }
            if *probe {
                let p = volterra::boundedness_probe(gf, space, &volterra::standard_family(), 6, &SpaceConfig::probe(), 1.05)?;
                for (k, m) in p.members.iter().enumerate() {
                    rows.push((format!("ratio_{}", m.label), k as f64, m.ratio_fine));
                }
                out.insert("probe".into(), to_value(&p)?);
            }
            ok(Value::Object(out))
        }
        Command::Sarason { gen, f, space, times } => {
            let g = Arc::new(generator(gen)?);
            let r = volterra::continuity_probe(g.clone(), func(f)?, times, (*space).into(), &cfg.flow, &SpaceConfig::probe())?;
            for (t, v) in r.times.iter().zip(&r.values) {
                rows.push(("seminorm".into(), *t, *v));
            }
            ok(json!({"generator": g.label(), "f": f, "report": to_value(&r)?}))
        }
        Command::Construct { space, g, resume, .. } => {
            let prior = match resume {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::domain(format!("reading {}: {e}", path.display())))?;
                    Some(ConstructionState::from_json(&text)?)
                }
                None => None,
            };
            let st = construct::build((*space).into(), g, &cfg.construct, prior)?;
            for s in &st.steps {
                rows.push(("a".into(), s.n as f64, s.a.to_f64()));
                rows.push(("witness".into(), s.n as f64, s.cert.witness));
                rows.push(("seminorm".into(), s.n as f64, s.cert.seminorm));
            }
            let code = if matches!(st.outcome, Outcome::Exhausted { .. }) { 4 } else { 0 };
            Ok((to_value(&st)?, code))
        }
        Command::BlockVerify { w, gap, turn } => {
            let p = cfg.precision_bits;
            let point = match (w, gap) {
                (Some(w), None) => {
                    let w = complex(w)?;
                    let r = w.norm();
                    if !(r < 1.0) {
                        return Err(Error::domain("block center must lie in the disc"));
                    }
                    ExtPoint::polar(if r == 0.0 { 0.0 } else { w.arg() / std::f64::consts::TAU }, XR::new(1.0 - r), p)
                }
                (None, Some(g)) => ExtPoint::polar(*turn, XR::parse(g)?, p),
                _ => return Err(Error::domain("give --w or --gap")),
            };
            ok(to_value(&construct::verify_block(&point, p)?)?)
        }
        Command::Corpus => ok(to_value(&corpus::run_corpus(sc, &cfg.flow)?)?),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Domain(_) => "domain",
        Error::Admissibility(_) => "admissibility",
        Error::Numerical(_) => "numerical",
        Error::Inconclusive(_) => "inconclusive",
        Error::Invariant(_) => "invariant",
    }
}

/// Runs a parsed command line and renders the report document.
pub fn run_cli(cli: &Cli) -> Outcome_ {
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(cli.command.name()));
    let mut rows = Vec::new();
    let code = match RunConfig::from_cli(cli) {
        Err(e) => {
            doc.insert("status".into(), json!("error"));
            doc.insert("error".into(), json!({"kind": error_kind(&e), "message": e.to_string()}));
            e.exit_code()
        }
        Ok(cfg) => {
            doc.insert("config".into(), to_value(&cfg).unwrap_or(Value::Null));
            match execute(&cli.command, &cfg, &mut rows) {
                Ok((v, code)) => {
                    doc.insert("status".into(), json!(if code == 0 { "ok" } else { "exhausted" }));
                    doc.insert("result".into(), v);
                    code
                }
                Err(e) => {
                    doc.insert("status".into(), json!("error"));
                    doc.insert("error".into(), json!({"kind": error_kind(&e), "message": e.to_string()}));
                    e.exit_code()
                }
            }
        }
    };
    let json = serde_json::to_string_pretty(&render_numbers(Value::Object(doc))).unwrap_or_default();
    Outcome_ { code, json, rows }
}

pub fn csv_text(rows: &[Row]) -> String {
    let mut s = String::from("series,parameter,value\n");
    for (name, p, v) in rows {
        s.push_str(&format!("{name},{p:.16e},{v:.16e}\n"));
    }
    s
}

/// Full entry point: parse `args`, print the report, write the sidecar.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = run_cli(&cli);
    {
        use std::io::Write;
        let mut so = std::io::stdout().lock();
        let _ = writeln!(so, "{}", out.json);
    }
    if let Some(path) = &cli.csv {
        if let Err(e) = std::fs::write(path, csv_text(&out.rows)) {
            eprintln!("cannot write {}: {e}", path.display());
            return 4.max(out.code);
        }
    }
    out.code
}
