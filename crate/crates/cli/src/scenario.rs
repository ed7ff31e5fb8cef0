//! Scenario files and the experiments they drive.
//!
//! ```json
//! {
//!   "kind": "zeno",
//!   "seed": 7,
//!   "output": "zeno-out",
//!   "parameters": { "strategy": "superpose(hermite(0), hermite(1))", "omega_t": 3.141592653589793 }
//! }
//! ```
//!
//! An auction may also be given in the short form
//! `{"buyers": [...], "seller": "...", "pricing": "first", ...}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qmg_core::auction::{
    enumerate_auction, run_auction, transaction_probabilities, AuctionInstance, Histogram, Pricing,
};
use qmg_core::clearing::{
    execution_rate, fixed_point, market_temperature, profit_intensity, run_rounds, write_cooling_table,
    write_round_log, ClearingPolicy, CoolingRow, Division, PreparedMarket, RWModel,
};
use qmg_core::numerics::Grid;
use qmg_core::risk::{effective_planck, risk_expectation, spectrum, thermal_energy};
use qmg_core::strategy::{parse_strategy, LiteralContext, MarketState};
use qmg_core::wigner::{
    coherent_wigner, dominant_curves, is_giffen, marginal_curves, mixture, phase_space_grids, thermal_grids,
    thermal_wigner, wigner_transform, wigner_transform_supply, CoherentParams, PhaseSpaceDensity, ThermalMode,
};
use qmg_core::zeno::{freeze_experiment, frozen_fraction, write_freeze_table, ZenoRun};
use qmg_core::{Representation, RiskParams, Strategy};

use crate::error::{CliError, InModule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Curves,
    FixedPoint,
    Auction,
    Zeno,
    Thermal,
    RiskSpectrum,
    Clearing,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: Kind,
    #[serde(default = "empty_object")]
    parameters: Value,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

fn empty_object() -> Value {
    json!({})
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: Kind,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Written files, the manifest last.
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Output {
    name: &'static str,
    description: &'static str,
    bytes: Vec<u8>,
}

struct Produced {
    resolved: Value,
    outputs: Vec<Output>,
    summary: Value,
}

/// Reads, validates and runs the scenario at `path`, writing its outputs.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let (doc, prefix) = match &doc {
        Value::Object(m) if !m.contains_key("kind") && m.contains_key("buyers") => {
            (json!({ "kind": "auction", "parameters": doc }), "")
        }
        _ => (doc, "parameters"),
    };
    let env: Envelope = from_value(doc, "")?;
    let ctx = Ctx { prefix, base: base.clone() };
    let seed = opts.seed.or(env.seed).unwrap_or(0);
    let produced = match env.kind {
        Kind::Curves => curves(&ctx, env.parameters)?,
        Kind::FixedPoint => fixed_point_table(&ctx, env.parameters)?,
        Kind::Auction => auction(&ctx, env.parameters, opts.seed, env.seed)?,
        Kind::Zeno => zeno(&ctx, env.parameters)?,
        Kind::Thermal => thermal(&ctx, env.parameters)?,
        Kind::RiskSpectrum => risk_spectrum(&ctx, env.parameters)?,
        Kind::Clearing => clearing(&ctx, env.parameters, seed)?,
    };
    let seed = match env.kind {
        Kind::Auction => produced.resolved["seed"].as_u64().unwrap_or(seed),
        _ => seed,
    };

    let out_dir = match (&opts.out, &env.output) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            base.join(format!("{stem}-out"))
        }
    };
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut files = Vec::new();
    for o in &produced.outputs {
        let p = out_dir.join(o.name);
        fs::write(&p, &o.bytes).map_err(|e| CliError::io(&p, e))?;
        files.push(p);
    }
    let manifest = json!({
        "tool": "qmg",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": qmg_core::VERSION,
        "kind": env.kind,
        "seed": seed,
        "scenario": path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "parameters": produced.resolved,
        "outputs": produced
            .outputs
            .iter()
            .map(|o| json!({ "file": o.name, "description": o.description }))
            .collect::<Vec<_>>(),
        "summary": produced.summary,
    });
    let p = out_dir.join("manifest.json");
    fs::write(&p, pretty(&manifest)).map_err(|e| CliError::io(&p, e))?;
    files.push(p);
    Ok(RunReport { kind: env.kind, seed, out_dir, files, summary: produced.summary })
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

struct Ctx {
    prefix: &'static str,
    base: PathBuf,
}

impl Ctx {
    fn path(&self, field: &str) -> String {
        join_path(self.prefix, field)
    }

    fn strategy(&self, literal: &str, risk: RiskParams, field: &str) -> Result<Strategy, CliError> {
        let ctx = LiteralContext { risk, base_dir: self.base.clone() };
        parse_strategy(literal, &ctx).at(&self.path(field))
    }

    fn params<T: DeserializeOwned>(&self, v: Value) -> Result<T, CliError> {
        from_value(v, self.prefix)
    }
}

fn join_path(prefix: &str, field: &str) -> String {
    match (prefix.is_empty(), field.is_empty() || field == ".") {
        (_, true) => {
            if prefix.is_empty() {
                ".".into()
            } else {
                prefix.into()
            }
        }
        (true, false) => field.into(),
        (false, false) if field.starts_with('[') => format!("{prefix}{field}"),
        (false, false) => format!("{prefix}.{field}"),
    }
}

fn from_value<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = join_path(prefix, &e.path().to_string());
        CliError::invalid(path, e.into_inner())
    })
}

fn resolved<T: Serialize>(p: &T) -> Value {
    serde_json::to_value(p).expect("parameters serialize")
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> qmg_core::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RiskSpec {
    #[serde(default = "one")]
    hbar_e: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(default = "one")]
    m: f64,
    #[serde(default)]
    theta_nc: f64,
}

impl Default for RiskSpec {
    fn default() -> Self {
        Self { hbar_e: 1.0, theta: None, omega: None, m: 1.0, theta_nc: 0.0 }
    }
}

impl RiskSpec {
    fn params(&self, ctx: &Ctx) -> Result<RiskParams, CliError> {
        let path = ctx.path("risk");
        match (self.theta, self.omega) {
            (Some(_), Some(_)) => Err(CliError::invalid(path, "give either theta or omega, not both")),
            (Some(t), None) => RiskParams::new(self.hbar_e, t, self.m, self.theta_nc).at(&path),
            (None, w) => RiskParams::with_omega(self.hbar_e, w.unwrap_or(1.0), self.m, self.theta_nc).at(&path),
        }
    }
}

fn grid_points() -> usize {
    201
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Component {
    weight: f64,
    strategy: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CoherentSpec {
    r: f64,
    #[serde(default = "one")]
    eta: f64,
    #[serde(default)]
    p0: f64,
    #[serde(default)]
    q0: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CurvesParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture: Option<Vec<Component>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coherent: Option<CoherentSpec>,
    #[serde(default)]
    risk: RiskSpec,
    #[serde(default = "grid_points")]
    n_p: usize,
    #[serde(default = "grid_points")]
    n_q: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_slice: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_slice: Option<f64>,
    /// Use full marginals instead of slices through the density.
    #[serde(default)]
    marginal: bool,
    #[serde(default = "yes")]
    write_density: bool,
}

fn strategy_density(s: &Strategy, hbar: f64, n_p: usize, n_q: usize) -> qmg_core::Result<PhaseSpaceDensity> {
    let (pg, qg) = phase_space_grids(s, hbar, n_p, n_q)?;
    density_on(s, &pg, &qg, hbar)
}

fn density_on(s: &Strategy, pg: &Grid, qg: &Grid, hbar: f64) -> qmg_core::Result<PhaseSpaceDensity> {
    match s.representation() {
        Representation::Demand => wigner_transform(s, pg, qg, hbar),
        Representation::Supply => wigner_transform_supply(s, pg, qg, hbar),
    }
}

fn curves(ctx: &Ctx, v: Value) -> Result<Produced, CliError> {
    let p: CurvesParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    let hbar = effective_planck(&risk);
    let given = [p.strategy.is_some(), p.mixture.is_some(), p.coherent.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(CliError::invalid(ctx.path(""), "give exactly one of strategy, mixture or coherent"));
    }
    for (n, field) in [(p.n_p, "n_p"), (p.n_q, "n_q")] {
        if n < Grid::MIN_POINTS {
            return Err(CliError::invalid(ctx.path(field), format!("need at least {} points", Grid::MIN_POINTS)));
        }
    }
    let density = if let Some(lit) = &p.strategy {
        let s = ctx.strategy(lit, risk, "strategy")?;
        if s.is_improper() {
            return Err(CliError::invalid(
                ctx.path("strategy"),
                "an exact-price commitment has no phase-space density",
            ));
        }
        strategy_density(&s, hbar, p.n_p, p.n_q).in_module("wigner")?
    } else if let Some(parts) = &p.mixture {
        if parts.is_empty() {
            return Err(CliError::invalid(ctx.path("mixture"), "empty mixture"));
        }
        let mut strategies = Vec::new();
        for (i, c) in parts.iter().enumerate() {
            let s = ctx.strategy(&c.strategy, risk, &format!("mixture[{i}].strategy"))?;
            if s.is_improper() {
                return Err(CliError::invalid(
                    ctx.path(&format!("mixture[{i}].strategy")),
                    "an exact-price commitment has no phase-space density",
                ));
            }
            strategies.push((c.weight, s));
        }
        // common grids covering every component
        let mut bounds = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (_, s) in &strategies {
            let (pg, qg) = phase_space_grids(s, hbar, p.n_p, p.n_q).in_module("wigner")?;
            bounds = (bounds.0.min(pg.lo()), bounds.1.max(pg.hi()), bounds.2.min(qg.lo()), bounds.3.max(qg.hi()));
        }
        let pg = Grid::new(bounds.0, bounds.1, p.n_p).in_module("wigner")?;
        let qg = Grid::new(bounds.2, bounds.3, p.n_q).in_module("wigner")?;
        let comps = strategies
            .iter()
            .map(|(w, s)| Ok((*w, density_on(s, &pg, &qg, hbar)?)))
            .collect::<qmg_core::Result<Vec<_>>>()
            .in_module("wigner")?;
        mixture(&comps).at(&ctx.path("mixture"))?
    } else {
        let c = p.coherent.as_ref().expect("checked above");
        let cp = CoherentParams::new(c.r, c.eta, c.p0, c.q0).at(&ctx.path("coherent"))?;
        let (dp, dq) = (cp.delta_p(hbar), cp.delta_q());
        let pg = Grid::new(c.p0 - 8.0 * dp, c.p0 + 8.0 * dp, p.n_p).in_module("wigner")?;
        let qg = Grid::new(c.q0 - 8.0 * dq, c.q0 + 8.0 * dq, p.n_q).in_module("wigner")?;
        coherent_wigner(&cp, hbar, &pg, &qg).in_module("wigner")?
    };

    let dc = if p.marginal {
        marginal_curves(&density).in_module("wigner")?
    } else {
        dominant_curves(&density, p.p_slice, p.q_slice).map_err(|e| match e {
            qmg_core::Error::ParameterRange(m) => CliError::invalid(ctx.path("p_slice"), m),
            e => CliError::Numerical { module: "wigner", source: e },
        })?
    };
    let giffen = is_giffen(&density, None);
    let m = density.moments();
    let mut outputs = Vec::new();
    if p.write_density {
        outputs.push(Output {
            name: "density.csv",
            description: "phase-space density p,q,w",
            bytes: csv_bytes(|b| density.write_csv(b)),
        });
    }
    outputs.push(Output {
        name: "curves.csv",
        description: "dominant demand and supply curves lnc,Fd,Fs",
        bytes: csv_bytes(|b| dc.write_csv(b)),
    });
    let summary = json!({
        "moments": { "mass": m.mass, "mean_p": m.mean_p, "mean_q": m.mean_q, "std_p": m.std_p, "std_q": m.std_q, "corr": m.corr },
        "giffen": giffen.is_giffen,
        "min_value": giffen.min_value,
        "witness": [giffen.witness.0, giffen.witness.1],
        "slices": dc.slices.map(|(a, b)| [a, b]),
        "fd_monotone": dc.fd_monotone(),
        "fs_monotone": dc.fs_monotone(),
        "fd_normalized": dc.fd_normalized,
        "fs_normalized": dc.fs_normalized,
    });
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FixedPointParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigmas: Option<Vec<f64>>,
}

fn fixed_point_table(ctx: &Ctx, v: Value) -> Result<Produced, CliError> {
    let p: FixedPointParams = ctx.params(v)?;
    let (sigmas, field) = match (&p.sigma, &p.sigmas) {
        (Some(_), Some(_)) => return Err(CliError::invalid(ctx.path(""), "give either sigma or sigmas")),
        (Some(s), None) => (vec![*s], "sigma".to_string()),
        (None, Some(list)) if !list.is_empty() => (list.clone(), "sigmas".to_string()),
        (None, Some(_)) => return Err(CliError::invalid(ctx.path("sigmas"), "empty list")),
        (None, None) => (vec![1.0], "sigma".to_string()),
    };
    let mut rows = Vec::new();
    for (i, &sigma) in sigmas.iter().enumerate() {
        if !(sigma.is_finite() && sigma > 0.0) {
            let f = if field == "sigma" { field.clone() } else { format!("sigmas[{i}]") };
            return Err(CliError::invalid(ctx.path(&f), format!("sigma must be positive, got {sigma}")));
        }
        let a = fixed_point(sigma).in_module("clearing")?;
        rows.push(CoolingRow {
            sigma,
            fixed_point: a,
            max_intensity: profit_intensity(a, sigma).in_module("clearing")?,
        });
    }
    let summary = json!({
        "fixed_points": rows.iter().map(|r| json!({ "sigma": r.sigma, "fixed_point": r.fixed_point })).collect::<Vec<_>>(),
    });
    let outputs = vec![Output {
        name: "fixed_point.csv",
        description: "profit-intensity fixed point sigma,fixed_point,max_intensity",
        bytes: csv_bytes(|b| write_cooling_table(&rows, b)),
    }];
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum PricingSpec {
    #[default]
    First,
    Second,
    Mixed,
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AuctionParams {
    buyers: Vec<String>,
    seller: String,
    #[serde(default)]
    pricing: PricingSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default = "default_samples")]
    samples: usize,
    seed: Option<u64>,
    #[serde(default)]
    risk: RiskSpec,
}

fn auction(ctx: &Ctx, v: Value, cli_seed: Option<u64>, env_seed: Option<u64>) -> Result<Produced, CliError> {
    let mut p: AuctionParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    if p.buyers.is_empty() {
        return Err(CliError::invalid(ctx.path("buyers"), "an auction needs at least one buyer"));
    }
    if p.samples == 0 {
        return Err(CliError::invalid(ctx.path("samples"), "need at least one sample"));
    }
    let pricing = match (p.pricing, p.weight) {
        (PricingSpec::Mixed, Some(w)) if (0.0..=1.0).contains(&w) => Pricing::Mixed(w),
        (PricingSpec::Mixed, Some(w)) => {
            return Err(CliError::invalid(ctx.path("weight"), format!("weight {w} outside [0, 1]")))
        }
        (PricingSpec::Mixed, None) => {
            return Err(CliError::invalid(ctx.path("weight"), "mixed pricing needs a weight"))
        }
        (_, Some(_)) => return Err(CliError::invalid(ctx.path("weight"), "weight applies to mixed pricing only")),
        (PricingSpec::First, None) => Pricing::First,
        (PricingSpec::Second, None) => Pricing::Second,
    };
    let seed = cli_seed.or(p.seed).or(env_seed).unwrap_or(0);
    p.seed = Some(seed);
    let mut buyers = Vec::new();
    for (i, lit) in p.buyers.iter().enumerate() {
        let field = format!("buyers[{i}]");
        let s = ctx.strategy(lit, risk, &field)?;
        if s.representation() != Representation::Demand {
            return Err(CliError::invalid(ctx.path(&field), "buyers bid in the demand picture"));
        }
        buyers.push(s);
    }
    // the seller quotes in the supply picture unless told otherwise
    let seller_lit = if p.seller.trim_start().starts_with("supply:") || p.seller.trim_start().starts_with("demand:") {
        p.seller.clone()
    } else {
        format!("supply:{}", p.seller)
    };
    let seller = ctx.strategy(&seller_lit, risk, "seller")?;
    if seller.representation() != Representation::Supply {
        return Err(CliError::invalid(ctx.path("seller"), "the seller quotes in the supply picture"));
    }
    let inst = AuctionInstance::new(buyers, seller, pricing, p.samples, seed).at(&ctx.path(""))?;
    let out = run_auction(&inst);
    let quad = transaction_probabilities(&inst);
    let exact = enumerate_auction(&inst).ok();
    let results = json!({
        "samples": out.samples,
        "winner_counts": out.winner_counts,
        "winner_freq": out.winner_freq,
        "p_no_trade": out.p_no_trade,
        "revenue_mean": out.revenue_mean,
        "revenue_std": out.revenue_std,
        "revenue_se": out.revenue_se,
        "quadrature": {
            "per_buyer": quad.per_buyer,
            "total": quad.total(),
            "no_trade": quad.no_trade,
        },
        "exact": exact.as_ref().map(|e| json!({
            "winner_prob": e.winner_prob,
            "p_no_trade": e.p_no_trade,
            "revenue_mean": e.revenue_mean,
        })),
    });
    let outputs = vec![
        Output { name: "auction.json", description: "auction results", bytes: pretty(&results) },
        Output {
            name: "histogram.csv",
            description: "winning log-price histogram lo,hi,center,count",
            bytes: histogram_csv(&out.histogram),
        },
    ];
    let summary = json!({
        "revenue_mean": out.revenue_mean,
        "revenue_se": out.revenue_se,
        "p_no_trade": out.p_no_trade,
    });
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

fn histogram_csv(h: &Histogram) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lo", "hi", "center", "count"]).expect("writing to memory");
    for (i, c) in h.counts.iter().enumerate() {
        let (lo, hi) = (h.edges[i], h.edges[i + 1]);
        w.write_record(&[lo.to_string(), hi.to_string(), (0.5 * (lo + hi)).to_string(), c.to_string()])
            .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

fn default_n_values() -> Vec<usize> {
    vec![1, 10, 100, 1000]
}

fn default_threshold() -> f64 {
    0.99
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ZenoParams {
    strategy: String,
    #[serde(default)]
    risk: RiskSpec,
    /// Phase `ωT`.
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_t: Option<f64>,
    /// Total time in units of `θ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    total_time: Option<f64>,
    #[serde(default = "default_n_values")]
    n_values: Vec<usize>,
    /// Further traders whose frozen fraction is tabulated.
    #[serde(skip_serializing_if = "Option::is_none")]
    crowd: Option<Vec<String>>,
    #[serde(default = "default_threshold")]
    threshold: f64,
}

fn zeno(ctx: &Ctx, v: Value) -> Result<Produced, CliError> {
    let p: ZenoParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    let omega_t = match (p.omega_t, p.total_time) {
        (Some(_), Some(_)) => return Err(CliError::invalid(ctx.path(""), "give either omega_t or total_time")),
        (Some(w), None) => w,
        (None, Some(t)) => 2.0 * std::f64::consts::PI * t,
        (None, None) => return Err(CliError::invalid(ctx.path("omega_t"), "missing evolution time")),
    };
    if !(omega_t.is_finite() && omega_t >= 0.0) {
        return Err(CliError::invalid(ctx.path("omega_t"), "evolution time must be >= 0"));
    }
    if p.n_values.is_empty() || p.n_values[0] == 0 || p.n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid(ctx.path("n_values"), "need positive, strictly ascending measurement counts"));
    }
    if !(0.0..=1.0).contains(&p.threshold) {
        return Err(CliError::invalid(ctx.path("threshold"), "threshold outside [0, 1]"));
    }
    let run_for = |lit: &str, field: &str| -> Result<ZenoRun, CliError> {
        let s = ctx.strategy(lit, risk, field)?;
        if s.is_improper() {
            return Err(CliError::invalid(ctx.path(field), "an exact-price commitment has no eigenbasis expansion"));
        }
        ZenoRun::from_phase(&s, omega_t, 1, risk).in_module("zeno")
    };
    let run = run_for(&p.strategy, "strategy")?;
    let rows = freeze_experiment(&run, &p.n_values).in_module("zeno")?;
    let mut outputs = vec![Output {
        name: "zeno.csv",
        description: "survival under repeated measurement n,survival",
        bytes: csv_bytes(|b| write_freeze_table(&rows, b)),
    }];
    let mut summary = json!({
        "levels": run.levels(),
        "omega_t": omega_t,
        "survival": rows.last().map(|r| r.1),
    });
    if let Some(crowd) = &p.crowd {
        let mut runs = vec![run];
        for (i, lit) in crowd.iter().enumerate() {
            runs.push(run_for(lit, &format!("crowd[{i}]"))?);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "frozen_fraction"]).expect("writing to memory");
        for &n in &p.n_values {
            let at_n =
                runs.iter().map(|r| r.with_measurements(n)).collect::<qmg_core::Result<Vec<_>>>().in_module("zeno")?;
            let f = frozen_fraction(&at_n, p.threshold).in_module("zeno")?;
            w.write_record(&[n.to_string(), f.to_string()]).expect("writing to memory");
        }
        outputs.push(Output {
            name: "frozen.csv",
            description: "fraction of traders frozen at the threshold n,frozen_fraction",
            bytes: w.into_inner().expect("writing to memory"),
        });
        summary["traders"] = json!(runs.len());
    }
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum ThermalModeSpec {
    #[default]
    Closed,
    Series,
}

fn default_half_width() -> f64 {
    6.0
}

fn default_levels() -> usize {
    200
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ThermalParams {
    beta: f64,
    #[serde(default)]
    risk: RiskSpec,
    /// Half-width of the grid in thermal standard deviations.
    #[serde(default = "default_half_width")]
    half_width: f64,
    #[serde(default = "grid_points")]
    n: usize,
    #[serde(default)]
    mode: ThermalModeSpec,
    #[serde(default = "default_levels")]
    levels: usize,
    #[serde(default = "yes")]
    curves: bool,
}

fn thermal(ctx: &Ctx, v: Value) -> Result<Produced, CliError> {
    let p: ThermalParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    if !(p.beta.is_finite() && p.beta > 0.0) {
        return Err(CliError::invalid(ctx.path("beta"), "beta must be positive"));
    }
    if !(p.half_width.is_finite() && p.half_width > 0.0) {
        return Err(CliError::invalid(ctx.path("half_width"), "half_width must be positive"));
    }
    if p.n < Grid::MIN_POINTS {
        return Err(CliError::invalid(ctx.path("n"), format!("need at least {} points", Grid::MIN_POINTS)));
    }
    let mode = match p.mode {
        ThermalModeSpec::Closed => ThermalMode::ClosedForm,
        ThermalModeSpec::Series if p.levels == 0 => {
            return Err(CliError::invalid(ctx.path("levels"), "series needs at least one level"))
        }
        ThermalModeSpec::Series => ThermalMode::Series(p.levels),
    };
    let (pg, qg) = thermal_grids(p.beta, &risk, p.half_width, p.n).in_module("wigner")?;
    let d = thermal_wigner(p.beta, &risk, &pg, &qg, mode).in_module("wigner")?;
    let (temperature, energy) = market_temperature(p.beta, &risk).in_module("clearing")?;
    let m = d.moments();
    let mut outputs = vec![Output {
        name: "thermal.csv",
        description: "thermal phase-space density p,q,w",
        bytes: csv_bytes(|b| d.write_csv(b)),
    }];
    if p.curves {
        let dc = dominant_curves(&d, None, None).in_module("wigner")?;
        outputs.push(Output {
            name: "curves.csv",
            description: "dominant demand and supply curves lnc,Fd,Fs",
            bytes: csv_bytes(|b| dc.write_csv(b)),
        });
    }
    let summary = json!({
        "temperature": temperature,
        "energy": energy,
        "energy_check": thermal_energy(p.beta, &risk).in_module("risk")?,
        "mass": m.mass,
        "std_p": m.std_p,
        "std_q": m.std_q,
        "min_value": d.min().0,
    });
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

fn default_spectrum_levels() -> usize {
    10
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SpectrumParams {
    #[serde(default)]
    risk: RiskSpec,
    #[serde(default = "default_spectrum_levels")]
    levels: usize,
    #[serde(default)]
    strategies: Vec<String>,
}

fn risk_spectrum(ctx: &Ctx, v: Value) -> Result<Produced, CliError> {
    let p: SpectrumParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    if p.levels == 0 {
        return Err(CliError::invalid(ctx.path("levels"), "need at least one level"));
    }
    let spec = spectrum(&risk, p.levels).in_module("risk")?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "energy"]).expect("writing to memory");
    for (k, e) in spec.eigenvalues.iter().enumerate() {
        w.write_record(&[k.to_string(), e.to_string()]).expect("writing to memory");
    }
    let mut outputs = vec![Output {
        name: "spectrum.csv",
        description: "risk operator eigenvalues k,energy",
        bytes: w.into_inner().expect("writing to memory"),
    }];
    if !p.strategies.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "strategy", "expectation"]).expect("writing to memory");
        for (i, lit) in p.strategies.iter().enumerate() {
            let field = format!("strategies[{i}]");
            let s = ctx.strategy(lit, risk, &field)?;
            if s.is_improper() {
                return Err(CliError::invalid(ctx.path(&field), "an exact-price commitment has unbounded risk"));
            }
            let e = risk_expectation(&s, &risk).in_module("risk")?;
            w.write_record(&[i.to_string(), lit.clone(), e.to_string()]).expect("writing to memory");
        }
        outputs.push(Output {
            name: "expectations.csv",
            description: "risk inclination of each strategy index,strategy,expectation",
            bytes: w.into_inner().expect("writing to memory"),
        });
    }
    let summary = json!({
        "effective_planck": effective_planck(&risk),
        "omega": risk.omega(),
        "ground_energy": spec.eigenvalues[0],
    });
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum PolicySpec {
    Named(String),
    Fixed { buyers: Vec<usize>, sellers: Vec<usize> },
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self::Named("random-half".into())
    }
}

fn default_rounds() -> usize {
    1000
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ClearingParams {
    traders: Vec<String>,
    #[serde(default)]
    risk: RiskSpec,
    #[serde(default = "default_rounds")]
    rounds: usize,
    #[serde(default)]
    policy: PolicySpec,
    /// Inverse temperature of a thermal rest of the world.
    #[serde(skip_serializing_if = "Option::is_none")]
    rw_beta: Option<f64>,
    /// Non-increasing schedule of rest-of-the-world widths.
    #[serde(skip_serializing_if = "Option::is_none")]
    cooling: Option<Vec<f64>>,
}

fn clearing(ctx: &Ctx, v: Value, seed: u64) -> Result<Produced, CliError> {
    let p: ClearingParams = ctx.params(v)?;
    let risk = p.risk.params(ctx)?;
    if p.traders.len() < 2 {
        return Err(CliError::invalid(ctx.path("traders"), "clearing needs at least two traders"));
    }
    if p.rounds == 0 {
        return Err(CliError::invalid(ctx.path("rounds"), "need at least one round"));
    }
    let policy = match &p.policy {
        PolicySpec::Named(n) if n == "random-half" => ClearingPolicy::RandomHalf,
        PolicySpec::Named(n) => return Err(CliError::invalid(ctx.path("policy"), format!("unknown policy `{n}`"))),
        PolicySpec::Fixed { buyers, sellers } => ClearingPolicy::Fixed(
            Division::new(buyers.clone(), sellers.clone(), p.traders.len()).at(&ctx.path("policy"))?,
        ),
    };
    let traders = p
        .traders
        .iter()
        .enumerate()
        .map(|(i, lit)| ctx.strategy(lit, risk, &format!("traders[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let market = MarketState::new(traders).at(&ctx.path("traders"))?;
    let prepared = PreparedMarket::new(&market, risk.hbar_e()).in_module("clearing")?;
    let rounds = run_rounds(&prepared, &policy, p.rounds, seed).in_module("clearing")?;
    let (rate, se) = execution_rate(&prepared, &policy, p.rounds, seed).in_module("clearing")?;
    let mut outputs = vec![Output {
        name: "clearing_log.csv",
        description: "round log round,trader,side,logprice,executed,flow",
        bytes: csv_bytes(|b| write_round_log(&rounds, b)),
    }];
    let mut summary = json!({ "execution_rate": rate, "execution_rate_se": se });
    if let Some(beta) = p.rw_beta {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CliError::invalid(ctx.path("rw_beta"), "beta must be positive"));
        }
        let rw = RWModel::thermal(beta, &risk, 201).in_module("clearing")?;
        let sigma = rw.sigma();
        summary["rest_of_world"] = json!({
            "beta": beta,
            "temperature": rw.temperature(),
            "sigma": sigma,
            "fixed_point": fixed_point(sigma).in_module("clearing")?,
        });
    }
    if let Some(sigmas) = &p.cooling {
        if sigmas.is_empty() {
            return Err(CliError::invalid(ctx.path("cooling"), "empty schedule"));
        }
        for (i, s) in sigmas.iter().enumerate() {
            if !(s.is_finite() && *s > 0.0) {
                return Err(CliError::invalid(ctx.path(&format!("cooling[{i}]")), "widths must be positive"));
            }
        }
        let rows = qmg_core::clearing::cooling_experiment(sigmas).at(&ctx.path("cooling"))?;
        outputs.push(Output {
            name: "cooling.csv",
            description: "cooling schedule sigma,fixed_point,max_intensity",
            bytes: csv_bytes(|b| write_cooling_table(&rows, b)),
        });
    }
    Ok(Produced { resolved: resolved(&p), outputs, summary })
}
