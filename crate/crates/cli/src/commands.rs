//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use magfloquet::classical::{growth_fit, orbit, PhaseState};
use magfloquet::hill::{classify, FundamentalPair, Regime, StabilityClass, Zeta};
use magfloquet::models::{FieldProfile, FieldSpec};
use magfloquet::quantum::propagate::unit_gaussian;
use magfloquet::quantum::{
    dispersive_ratio, gamma, mehler_propagate, strang_oracle, GridSpec, PropagationOptions, WaveFunction,
};
use magfloquet::scattering::{
    cook_integrand_partial_sums, resolvent_series_partial_sums, sigma_r_quadrature, wave_operator_defect,
    zeta2_singular_integral, ExcludedPair, WaveOpOptions,
};
use magfloquet::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, opt, sha256_hex, CliError, Csv, Manifest, RunOutput};
use crate::{Command, GlobalArgs};

/// Steps per period for the fundamental solutions.
const HILL_STEPS: f64 = 4096.0;

/// Inclusive `start:stop:count` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Linspace {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * step })
            .collect()
    }
}

fn parse_linspace(s: &str) -> Result<Linspace, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:count, got `{s}`"));
    }
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let start = f(parts[0])?;
    let stop = f(parts[1])?;
    let count: usize = parts[2].trim().parse().map_err(|e| format!("`{}`: {e}", parts[2]))?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(format!("`{s}` needs finite bounds and count >= 1"));
    }
    Ok(Linspace { start, stop, count })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSweep {
    pub name: ScanParam,
    pub range: Linspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanParam {
    B0,
    T0,
    T,
    Bdc,
    Bac,
    #[serde(rename = "m")]
    Mass,
    #[serde(rename = "q")]
    Charge,
}

fn parse_sweep(s: &str) -> Result<ParamSweep, String> {
    let (name, rest) = s.split_once(':').ok_or_else(|| format!("expected name:start:stop:count, got `{s}`"))?;
    let name = match name {
        "B0" => ScanParam::B0,
        "T0" => ScanParam::T0,
        "T" => ScanParam::T,
        "Bdc" => ScanParam::Bdc,
        "Bac" => ScanParam::Bac,
        "m" => ScanParam::Mass,
        "q" => ScanParam::Charge,
        other => return Err(format!("unknown parameter `{other}` (B0, T0, T, Bdc, Bac, m, q)")),
    };
    Ok(ParamSweep {
        name,
        range: parse_linspace(rest)?,
    })
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    /// First parameter as `name:start:stop:count`.
    #[arg(long, value_parser = parse_sweep)]
    pub param1: ParamSweep,
    /// Optional second parameter.
    #[arg(long, value_parser = parse_sweep)]
    pub param2: Option<ParamSweep>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrajectoryArgs {
    /// Initial position `x1,x2`.
    #[arg(long = "x0", value_parser = parse_pair, allow_hyphen_values = true)]
    pub x0: [f64; 2],
    /// Initial momentum `p1,p2`.
    #[arg(long = "p0", value_parser = parse_pair, allow_hyphen_values = true)]
    pub p0: [f64; 2],
    /// Last period index.
    #[arg(long = "N", default_value_t = 20)]
    pub n: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mehler,
    Strang,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PropagateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, value_enum, default_value = "mehler")]
    pub method: Method,
    /// Splitting step for `strang`; defaults to `|tau - s| / 1024`.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Include the configured potential in the `strang` evolution.
    #[arg(long)]
    pub with_potential: bool,
    /// Input wavefunction in the binary snapshot format; a unit Gaussian otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DispersiveArgs {
    /// Final times as `start:stop:count`.
    #[arg(long, value_parser = parse_linspace, allow_hyphen_values = true)]
    pub tau: Linspace,
    /// Initial times as `start:stop:count`.
    #[arg(long, value_parser = parse_linspace, allow_hyphen_values = true)]
    pub s: Linspace,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResolventArgs {
    #[arg(long, default_value_t = 6.0)]
    pub p: f64,
    #[arg(long = "N-max", alias = "n-max", default_value_t = 12)]
    pub n_max: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CookArgs {
    #[arg(long, default_value_t = 6.0)]
    pub p: f64,
    #[arg(long = "N-max", alias = "n-max", default_value_t = 12)]
    pub n_max: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SigmaRArgs {
    /// Real spectral parameter; enters only as a phase and does not change the output.
    #[arg(long = "lambda-spec", default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_spec: f64,
    /// Imaginary part of the spectral parameter.
    #[arg(long = "tau-im", default_value_t = 0.0, allow_hyphen_values = true)]
    pub tau_im: f64,
    /// Cutoff; defaults to 12 periods.
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Quadrature step; defaults to `T / 16`.
    #[arg(long)]
    pub dsigma: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    pub p: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WaveopArgs {
    /// Comma-separated first indices.
    #[arg(long = "N1", alias = "n1", value_delimiter = ',', default_values_t = [2, 3, 4], allow_hyphen_values = true)]
    pub n1: Vec<i64>,
    /// Comma-separated second indices, paired with `N1` in order.
    #[arg(long = "N2", alias = "n2", value_delimiter = ',', default_values_t = [4, 5, 6], allow_hyphen_values = true)]
    pub n2: Vec<i64>,
    /// Splitting step; defaults to `T / 128`.
    #[arg(long)]
    pub dt: Option<f64>,
}

/// Effective configuration plus the pieces every command needs.
struct Context {
    cfg: RunConfig,
    out: RunOutput,
    command: &'static str,
    parameters: serde_json::Value,
    excluded: Vec<ExcludedPair>,
    notes: Vec<String>,
}

impl Context {
    fn new(global: &GlobalArgs, command: &'static str, parameters: serde_json::Value) -> Result<Self, CliError> {
        let path = global
            .config
            .as_deref()
            .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
        let mut cfg = RunConfig::load(path)?;
        if global.grid_n.is_some() || global.grid_l.is_some() {
            let n = global.grid_n.unwrap_or(cfg.grid.n());
            let l = global.grid_l.unwrap_or(cfg.grid.half_extent());
            cfg.grid = GridSpec::new(n, l)?;
        }
        let dir = match (&global.out, &cfg.output_dir) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) => resolve(path, d),
            (None, None) => PathBuf::from("."),
        };
        // the output location is not part of the result
        cfg.output_dir = None;
        Ok(Context {
            out: RunOutput::new(&dir)?,
            cfg,
            command,
            parameters,
            excluded: Vec::new(),
            notes: Vec::new(),
        })
    }

    fn field(&self) -> Result<FieldSpec, CliError> {
        self.cfg.field()
    }

    fn pair_for(&self, field: &FieldSpec) -> Result<FundamentalPair, CliError> {
        Ok(FundamentalPair::integrate_with_tol(
            field,
            field.period() / HILL_STEPS,
            self.cfg.tolerances.wronskian_tol,
        )?)
    }

    fn pair(&self) -> Result<FundamentalPair, CliError> {
        self.pair_for(&self.field()?)
    }

    fn opts(&self) -> PropagationOptions {
        PropagationOptions {
            gamma_min: self.cfg.tolerances.gamma_min,
            ..PropagationOptions::default()
        }
    }

    fn finish(self) -> Result<(), CliError> {
        let canonical = self.cfg.canonical();
        let manifest = Manifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: sha256_hex(canonical.as_bytes()),
            config: serde_json::from_str(&canonical).expect("canonical config is JSON"),
            parameters: self.parameters,
            excluded_caustic_pairs: self.excluded,
            notes: self.notes,
        };
        self.out.finish(manifest)
    }
}

fn resolve(config_path: &Path, dir: &str) -> PathBuf {
    let d = PathBuf::from(dir);
    if d.is_absolute() {
        return d;
    }
    config_path.parent().map(|p| p.join(&d)).unwrap_or(d)
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialise")
}

pub fn dispatch(global: &GlobalArgs, command: &Command) -> Result<(), CliError> {
    match command {
        Command::Classify => run_classify(Context::new(global, "classify", json!({}))?),
        Command::Scan(a) => run_scan(Context::new(global, "scan", params(a))?, a),
        Command::Zeros => run_zeros(Context::new(global, "zeros", json!({}))?),
        Command::Trajectory(a) => run_trajectory(Context::new(global, "trajectory", params(a))?, a),
        Command::Propagate(a) => run_propagate(Context::new(global, "propagate", params(a))?, a),
        Command::Dispersive(a) => run_dispersive(Context::new(global, "dispersive", params(a))?, a),
        Command::Resolvent(a) => run_resolvent(Context::new(global, "resolvent", params(a))?, a),
        Command::Cook(a) => run_cook(Context::new(global, "cook", params(a))?, a),
        Command::SigmaR(a) => run_sigma_r(Context::new(global, "sigma-r", params(a))?, a),
        Command::Waveop(a) => run_waveop(Context::new(global, "waveop", params(a))?, a),
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Hyperbolic => "Hyperbolic",
        Regime::Parabolic => "Parabolic",
        Regime::Elliptic => "Elliptic",
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    #[serde(rename = "D")]
    d: f64,
    regime: Regime,
    lambda: Option<f64>,
    lambda_tilde: Option<f64>,
    #[serde(rename = "zeta2_T")]
    zeta2_t: f64,
    #[serde(rename = "zeta2_T_nonzero")]
    zeta2_t_nonzero: bool,
    zeros_zeta1: Vec<f64>,
    zeros_zeta2: Vec<f64>,
}

fn run_classify(mut ctx: Context) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let class = classify(&pair.monodromy(), ctx.cfg.tolerances.tau_d);
    let (zeta2_t, _) = pair.evaluate_zeta(Zeta::Z2, pair.period())?;
    let report = ClassifyReport {
        d: class.discriminant,
        regime: class.regime,
        lambda: class.floquet_exponent,
        lambda_tilde: class.lambda_tilde,
        zeta2_t,
        zeta2_t_nonzero: class.zeta2_t_nonzero,
        zeros_zeta1: pair.find_zeros(Zeta::Z1)?.zeros,
        zeros_zeta2: pair.find_zeros(Zeta::Z2)?.zeros,
    };
    println!("{}", serde_json::to_string(&report).expect("report serialises"));
    ctx.out.write_json("classify.json", &report)?;
    ctx.finish()
}

fn with_param(base: &FieldSpec, name: ScanParam, v: f64) -> Result<FieldSpec, CliError> {
    let (mut period, mut mass, mut charge) = (base.period(), base.mass(), base.charge());
    let mut profile = base.profile().clone();
    let mismatch = || CliError::Config(format!("parameter {name:?} does not apply to this field profile"));
    match name {
        ScanParam::T => period = v,
        ScanParam::Mass => mass = v,
        ScanParam::Charge => charge = v,
        ScanParam::B0 => match &mut profile {
            FieldProfile::Constant { b0 } | FieldProfile::Pulsed { b0, .. } => *b0 = v,
            _ => return Err(mismatch()),
        },
        ScanParam::T0 => match &mut profile {
            FieldProfile::Pulsed { t0, .. } => *t0 = v,
            _ => return Err(mismatch()),
        },
        ScanParam::Bdc => match &mut profile {
            FieldProfile::Sinusoidal { bdc, .. } => *bdc = v,
            _ => return Err(mismatch()),
        },
        ScanParam::Bac => match &mut profile {
            FieldProfile::Sinusoidal { bac, .. } => *bac = v,
            _ => return Err(mismatch()),
        },
    }
    Ok(FieldSpec::new(period, mass, charge, profile)?)
}

fn run_scan(mut ctx: Context, a: &ScanArgs) -> Result<(), CliError> {
    let base = ctx.field()?;
    let v1 = a.param1.range.values();
    let v2 = a.param2.as_ref().map(|p| p.range.values());
    let points: Vec<(f64, Option<f64>)> = match &v2 {
        Some(v2) => v1.iter().flat_map(|&x| v2.iter().map(move |&y| (x, Some(y)))).collect(),
        None => v1.iter().map(|&x| (x, None)).collect(),
    };
    let tau_d = ctx.cfg.tolerances.tau_d;
    let rows = points
        .par_iter()
        .map(|&(x, y)| -> Result<StabilityClass, CliError> {
            let mut field = with_param(&base, a.param1.name, x)?;
            if let (Some(p2), Some(y)) = (&a.param2, y) {
                field = with_param(&field, p2.name, y)?;
            }
            Ok(classify(&ctx.pair_for(&field)?.monodromy(), tau_d))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["param1", "param2", "D", "regime", "lambda"]);
    for ((x, y), c) in points.iter().zip(&rows) {
        csv.row([
            num(*x),
            opt(*y),
            num(c.discriminant),
            regime_name(c.regime).to_string(),
            opt(c.floquet_exponent),
        ]);
    }
    ctx.out.write("scan.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_zeros(mut ctx: Context) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let mut csv = Csv::new(&["zeta", "t", "derivative"]);
    for (label, which) in [("1", Zeta::Z1), ("2", Zeta::Z2)] {
        let set = pair.find_zeros(which)?;
        for (t, d) in set.zeros.iter().zip(&set.derivative_at_zero) {
            csv.row([label.to_string(), num(*t), num(*d)]);
        }
    }
    ctx.out.write("zeros.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_trajectory(mut ctx: Context, a: &TrajectoryArgs) -> Result<(), CliError> {
    let field = ctx.field()?;
    let pair = ctx.pair_for(&field)?;
    let state = PhaseState::new(a.x0, a.p0)?;
    let omega_t = field.omega_integral(field.period());
    let states = orbit(&pair.monodromy(), omega_t, &state, a.n)?;
    let mut csv = Csv::new(&["N", "x1", "x2", "p1", "p2", "norm_x"]);
    for (n, s) in states.iter().enumerate() {
        csv.row([n.to_string(), num(s.x[0]), num(s.x[1]), num(s.p[0]), num(s.p[1]), num(s.norm_x())]);
    }
    ctx.out.write("trajectory.csv", &csv.into_bytes())?;
    let norms: Vec<f64> = states.iter().map(PhaseState::norm_x).collect();
    match growth_fit(&norms, 0) {
        Ok(fit) => ctx.out.write_json("growth_fit.json", &fit)?,
        Err(e @ Error::InsufficientData { .. }) => ctx.notes.push(format!("growth fit skipped: {e}")),
        Err(e) => return Err(e.into()),
    }
    ctx.finish()
}

fn input_wave(ctx: &Context, input: Option<&Path>) -> Result<WaveFunction, CliError> {
    match input {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            Ok(WaveFunction::read_binary(std::io::BufReader::new(file))?)
        }
        None => Ok(unit_gaussian(ctx.cfg.grid)),
    }
}

#[derive(Serialize)]
struct PropagateReport {
    l2_in: f64,
    l2_out: f64,
    sup_out: f64,
    second_moment_out: f64,
}

fn run_propagate(mut ctx: Context, a: &PropagateArgs) -> Result<(), CliError> {
    let field = ctx.field()?;
    let psi = input_wave(&ctx, a.input.as_deref())?;
    let out = match a.method {
        Method::Mehler => {
            if a.with_potential {
                return Err(CliError::Config("--with-potential needs --method strang".into()));
            }
            mehler_propagate(&ctx.pair_for(&field)?, a.tau, a.s, &psi, &ctx.opts())?
        }
        Method::Strang => {
            let pot = if a.with_potential { Some(ctx.cfg.potential()?) } else { None };
            let dt = a.dt.unwrap_or((a.tau - a.s).abs() / 1024.0);
            strang_oracle(&field, pot.as_ref(), a.s, a.tau, dt, &psi)?
        }
    };
    let mut bytes = Vec::new();
    out.write_binary(&mut bytes)?;
    ctx.out.write("psi.bin", &bytes)?;
    let report = PropagateReport {
        l2_in: psi.l2_norm(),
        l2_out: out.l2_norm(),
        sup_out: out.sup_norm(),
        second_moment_out: out.second_moment(),
    };
    ctx.out.write_json("norms.json", &report)?;
    ctx.finish()
}

fn run_dispersive(mut ctx: Context, a: &DispersiveArgs) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let m = pair.field().mass();
    let psi = unit_gaussian(ctx.cfg.grid);
    let opts = ctx.opts();
    let pairs: Vec<(f64, f64)> = a
        .tau
        .values()
        .into_iter()
        .flat_map(|t| a.s.values().into_iter().map(move |s| (t, s)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(tau, s)| -> Result<(f64, Option<f64>), CliError> {
            let g = gamma(&pair, tau, s)?;
            match dispersive_ratio(&pair, tau, s, &psi, &opts) {
                Ok(r) => Ok((g, Some(r))),
                Err(Error::CausticProximity { .. }) => Ok((g, None)),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["tau", "s", "gamma", "ratio"]);
    for (&(tau, s), &(g, r)) in pairs.iter().zip(&rows) {
        match r {
            Some(r) => csv.row([num(tau), num(s), num(g), num(r)]),
            None => ctx.excluded.push(ExcludedPair { tau, s, gamma: g / m }),
        }
    }
    ctx.out.write("dispersive.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_resolvent(mut ctx: Context, a: &ResolventArgs) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let sums = resolvent_series_partial_sums(&pair, a.p, a.n_max)?;
    let terms = (0..=a.n_max)
        .into_par_iter()
        .map(|n| zeta2_singular_integral(&pair, n, a.p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["N", "I_N", "S_N"]);
    for (n, (i, s)) in terms.iter().zip(&sums).enumerate() {
        csv.row([n.to_string(), num(*i), num(*s)]);
    }
    ctx.out.write("resolvent.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_cook(mut ctx: Context, a: &CookArgs) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let pot = ctx.cfg.potential()?;
    let psi0 = unit_gaussian(ctx.cfg.grid);
    let series = cook_integrand_partial_sums(&pair, &pot, &psi0, a.n_max, a.p, &ctx.opts())?;
    let mut csv = Csv::new(&["N", "C_N", "increment"]);
    for (k, (c, inc)) in series.partial_sums.iter().zip(&series.increments).enumerate() {
        csv.row([(k + 1).to_string(), num(*c), num(*inc)]);
    }
    ctx.excluded = series.excluded;
    ctx.out.write("cook.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_sigma_r(mut ctx: Context, a: &SigmaRArgs) -> Result<(), CliError> {
    let pair = ctx.pair()?;
    let pot = ctx.cfg.potential()?;
    let period = pair.period();
    let phi = unit_gaussian(ctx.cfg.grid);
    let r = a.r.unwrap_or(12.0 * period);
    let dsigma = a.dsigma.unwrap_or(period / 16.0);
    let res = sigma_r_quadrature(&pair, &pot, &phi, a.lambda_spec, a.tau_im, r, dsigma, a.p)?;
    let mut csv = Csv::new(&["R", "sigma_R"]);
    for (r, s) in res.r_values.iter().zip(&res.sigma_values) {
        csv.row([num(*r), num(*s)]);
    }
    ctx.notes
        .push("lambda-spec enters only as a unimodular phase and does not change sigma_R".into());
    ctx.out.write("sigma_r.csv", &csv.into_bytes())?;
    ctx.finish()
}

fn run_waveop(mut ctx: Context, a: &WaveopArgs) -> Result<(), CliError> {
    if a.n1.len() != a.n2.len() {
        return Err(CliError::Config(format!(
            "--N1 has {} entries but --N2 has {}",
            a.n1.len(),
            a.n2.len()
        )));
    }
    let pair = ctx.pair()?;
    let pot = ctx.cfg.potential()?;
    let psi0 = unit_gaussian(ctx.cfg.grid);
    let period = pair.period();
    let dt = a.dt.unwrap_or(period / 128.0);
    let reports = a
        .n1
        .iter()
        .zip(&a.n2)
        .map(|(&n1, &n2)| wave_operator_defect(&pair, &pot, &psi0, n1, n2, dt, &WaveOpOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["N1", "N2", "defect"]);
    for r in &reports {
        csv.row([r.n1.to_string(), r.n2.to_string(), num(r.defect)]);
    }
    ctx.out.write("waveop.csv", &csv.into_bytes())?;
    ctx.out.write_json("waveop_report.json", &reports)?;
    ctx.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linspace_is_inclusive() {
        let l = parse_linspace("0.5:4.0:8").unwrap();
        let v = l.values();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[7], 4.0);
        assert_eq!(parse_linspace("1:2:1").unwrap().values(), vec![1.0]);
        assert!(parse_linspace("1:2").is_err());
        assert!(parse_linspace("1:2:0").is_err());
    }

    #[test]
    fn sweep_names() {
        assert_eq!(parse_sweep("T0:0.1:1.5:64").unwrap().name, ScanParam::T0);
        assert!(parse_sweep("X:0:1:2").is_err());
    }

    #[test]
    fn parameter_must_match_profile() {
        let f = FieldSpec::pulsed(7.0 * PI / 4.0, 1.0, 1.0, 2.0, 0.75 * PI).unwrap();
        assert!(with_param(&f, ScanParam::Bdc, 1.0).is_err());
        let g = with_param(&f, ScanParam::B0, 3.0).unwrap();
        assert_eq!(g.profile(), &FieldProfile::Pulsed { b0: 3.0, t0: 0.75 * PI });
    }
}
