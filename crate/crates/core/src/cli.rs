//! Command-line front end: parameter/config ingestion, grid sweeps and
//! figure-data emission.
//!
//! Subcommands: `classify`, `explosion-sweep`, `aivs-sweep`, `mgf`,
//! `solve-psi`. Defaults reproduce the reference parameter set
//! `rho = -0.8, lambda = 2, eta = 0.2, alpha = 0.6, v0 = 0.04` so the
//! standard figures need zero arguments. A flat `key=value` config file can
//! supply any value; command-line flags override it.
//!
//! Exit codes: 0 ok, 2 validation, 3 numeric/domain, 64 usage.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::explosion_sweep;
use crate::export::{write_csv, write_json, Cell};
use crate::implied_vol::aivs_sweep;
use crate::kernels::{Kernel, TabulatedKernel};
use crate::params::ModelParams;
use crate::riccati::{classify, delta_roots, discriminant, w_first_root, w_min_location};
use crate::solver::{mgf, mgf_classic, solve_psi, SolverConfig, VarianceCurve};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "rough-heston",
    version,
    about = "Moment explosions and implied-volatility slope bounds for rough and classic Heston models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Classify moment orders and print the symbol geometry per u.
    Classify(ClassifyArgs),
    /// Sweep explosion-time bounds over u and write CSV/JSON curve data.
    ExplosionSweep(ExplosionSweepArgs),
    /// Sweep implied-volatility slope bounds over maturities.
    AivsSweep(AivsSweepArgs),
    /// Evaluate the moment generating function at (u, t).
    Mgf(MgfArgs),
    /// Solve the Volterra-Riccati equation and dump the grid solution.
    SolvePsi(SolvePsiArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Spot/variance correlation in (-1, 1).
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Mean-reversion speed > 0.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Volatility of volatility > 0.
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Roughness index in (1/2, 1].
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Spot variance >= 0.
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Solver time step.
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    /// Solver horizon.
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Single moment order to classify.
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_step: Option<f64>,
}

#[derive(Args, Debug)]
struct ExplosionSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    u_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    u_step: Option<f64>,
    /// Also estimate each finite blow-up time numerically.
    #[arg(long)]
    numeric: bool,
}

#[derive(Args, Debug)]
struct AivsSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    t_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_step: Option<f64>,
}

#[derive(Args, Debug)]
struct MgfArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Moment order.
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    /// Maturity.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Flat forward variance level.
    #[arg(long, allow_negative_numbers = true)]
    xi_flat: Option<f64>,
    /// Forward variance curve file (two columns: T, xi).
    #[arg(long)]
    xi_file: Option<PathBuf>,
    /// Also evaluate the classic-model MGF and report the comparison.
    #[arg(long)]
    compare: bool,
}

#[derive(Args, Debug)]
struct SolvePsiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Moment order.
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    /// Tabulated kernel file (two columns: t, kappa); power-law otherwise.
    #[arg(long)]
    kernel_file: Option<PathBuf>,
}

/// Resolved run configuration: model parameters, solver settings, output.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Flat `key=value` file, `#` comments allowed. Keys use the flag spelling
/// without the leading dashes (e.g. `rho`, `u-min`, `xi-flat`).
fn load_config(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

struct Resolver {
    file: HashMap<String, String>,
}

impl Resolver {
    fn new(common: &CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(p) => load_config(p)?,
            None => HashMap::new(),
        };
        Ok(Resolver { file })
    }

    fn num(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Parse(format!("config key {key}: bad number {s:?}"))),
            None => Ok(default),
        }
    }

    fn opt_num(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key {key}: bad number {s:?}"))),
            None => Ok(None),
        }
    }

    fn text(&self, flag: Option<String>, key: &str, default: &str) -> String {
        flag.or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_string())
    }

    fn resolve(&self, common: &CommonArgs) -> Result<RunConfig> {
        let params = ModelParams::new(
            self.num(common.rho, "rho", -0.8)?,
            self.num(common.lambda, "lambda", 2.0)?,
            self.num(common.eta, "eta", 0.2)?,
            self.num(common.alpha, "alpha", 0.6)?,
            self.num(common.v0, "v0", 0.04)?,
        )?;
        let solver = SolverConfig {
            step: self.num(common.step, "step", 1e-3)?,
            horizon: self.num(common.horizon, "horizon", 50.0)?,
            ..SolverConfig::default()
        };
        solver.validate()?;
        let format = match self.text(common.format.clone(), "format", "csv").as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Error::InvalidParams(format!(
                    "format must be csv or json, got {other:?}"
                )))
            }
        };
        let out = common
            .out
            .clone()
            .or_else(|| self.file.get("out").map(PathBuf::from));
        Ok(RunConfig { params, solver, format, out })
    }
}

fn build_grid(min: f64, max: f64, step: f64, endpoint: Option<f64>) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParams(format!("grid step {step} must be positive")));
    }
    if !(max >= min) {
        return Err(Error::InvalidParams(format!("empty grid: [{min}, {max}]")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| min + i as f64 * step).collect();
    if let Some(e) = endpoint {
        if grid.last().map(|&l| e - l > 1e-12 * e.abs().max(1.0)) == Some(true) {
            grid.push(e);
        }
    }
    Ok(grid)
}

fn emit(cfg: &RunConfig, headers: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    match cfg.format {
        OutputFormat::Csv => write_csv(&mut buf, headers, rows)?,
        OutputFormat::Json => write_json(&mut buf, headers, rows)?,
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let r = Resolver::new(&args.common)?;
    let cfg = r.resolve(&args.common)?;
    let p = &cfg.params;
    let us: Vec<f64> = match (r.opt_num(args.u, "u")?, r.opt_num(args.u_min, "u-min")?) {
        (Some(u), _) => vec![u],
        (None, Some(min)) => {
            let max = r.num(args.u_max, "u-max", min)?;
            let step = r.num(args.u_step, "u-step", 1.0)?;
            build_grid(min, max, step, None)?
        }
        (None, None) => {
            return Err(Error::InvalidParams("classify needs --u or --u-min/--u-max".into()))
        }
    };
    let (dm, dp) = delta_roots(p);
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:>12} {:>5} {:>14} {:>14} {:>14} {:>14} {:>14}",
        "u", "case", "delta", "d_minus", "d_plus", "w0", "w_star"
    )?;
    for &u in &us {
        let ws = match w_first_root(p, u) {
            Ok(w) => format!("{w:.6}"),
            Err(_) => "-".to_string(),
        };
        writeln!(
            out,
            "{:>12.4} {:>5} {:>14.6} {:>14.6} {:>14.6} {:>14.6} {:>14}",
            u,
            classify(p, u).as_str(),
            discriminant(p, u),
            dm,
            dp,
            w_min_location(p, u),
            ws
        )?;
    }
    Ok(())
}

fn cmd_explosion_sweep(args: &ExplosionSweepArgs) -> Result<()> {
    let r = Resolver::new(&args.common)?;
    let cfg = r.resolve(&args.common)?;
    let grid = build_grid(
        r.num(args.u_min, "u-min", -20.0)?,
        r.num(args.u_max, "u-max", 150.0)?,
        r.num(args.u_step, "u-step", 0.5)?,
        None,
    )?;
    let numeric = args.numeric || r.file.get("numeric").map(|s| s == "true") == Some(true);
    let rows = explosion_sweep(&cfg.params, &grid, numeric.then_some(&cfg.solver))?;
    let mut headers = vec!["u", "case", "T1_star", "T1_bar_star", "km_bound"];
    if numeric {
        headers.push("numeric_estimate");
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|row| {
            let mut cells = vec![
                Cell::Num(row.u),
                Cell::Text(row.case.as_str().into()),
                Cell::Num(row.t1_star),
                Cell::Num(row.t1_bar_star),
                Cell::Num(row.km_bound),
            ];
            if numeric {
                cells.push(Cell::Num(row.numeric_estimate.unwrap_or(f64::INFINITY)));
            }
            cells
        })
        .collect();
    emit(&cfg, &headers, &table)
}

fn cmd_aivs_sweep(args: &AivsSweepArgs) -> Result<()> {
    let r = Resolver::new(&args.common)?;
    let cfg = r.resolve(&args.common)?;
    let tp = crate::critical::threshold_t_crit_prime(&cfg.params)?;
    let t_min = r.num(args.t_min, "t-min", 0.02)?;
    let t_step = r.num(args.t_step, "t-step", 0.02)?;
    let explicit_max = r.opt_num(args.t_max, "t-max")?;
    let grid = match explicit_max {
        Some(t_max) => build_grid(t_min, t_max, t_step, None)?,
        // default sweep covers (0, T'_crit] ending exactly at the threshold
        None => build_grid(t_min, tp, t_step, Some(tp))?,
    };
    let rows = aivs_sweep(&cfg.params, &grid)?;
    let headers = ["T", "aivs1_left", "aivs1_right", "bound_left", "asym_left", "asym_right"];
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.t),
                Cell::Num(r.aivs1_left),
                Cell::Num(r.aivs1_right),
                Cell::Num(r.bound_left),
                Cell::Num(r.asym_left),
                Cell::Num(r.asym_right),
            ]
        })
        .collect();
    emit(&cfg, &headers, &table)
}

fn cmd_mgf(args: &MgfArgs) -> Result<()> {
    let r = Resolver::new(&args.common)?;
    let cfg = r.resolve(&args.common)?;
    let u = r
        .opt_num(args.u, "u")?
        .ok_or_else(|| Error::InvalidParams("mgf needs --u".into()))?;
    let t = r
        .opt_num(args.t, "t")?
        .ok_or_else(|| Error::InvalidParams("mgf needs --t".into()))?;
    let xi = match (&args.xi_file, r.opt_num(args.xi_flat, "xi-flat")?) {
        (Some(path), _) => VarianceCurve::from_file(path)?,
        (None, Some(level)) => VarianceCurve::flat(level)?,
        (None, None) => VarianceCurve::flat(cfg.params.v0.max(1e-12))?,
    };
    let phi = mgf(&cfg.params, u, t, &xi, &cfg.solver)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "Phi_alpha({t}, {u}) = {}", crate::export::fmt_sig(phi)?)?;
    let compare = args.compare || r.file.get("compare").map(|s| s == "true") == Some(true);
    if compare {
        let classic = ModelParams { alpha: 1.0, ..cfg.params };
        let phi1 = mgf_classic(&classic, u, t, &xi)?;
        writeln!(out, "Phi_1({t}, {u}) = {}", crate::export::fmt_sig(phi1)?)?;
        writeln!(
            out,
            "comparison: Phi_1 <= Phi_alpha: {}",
            phi1 <= phi * (1.0 + 1e-12)
        )?;
    }
    Ok(())
}

fn cmd_solve_psi(args: &SolvePsiArgs) -> Result<()> {
    let r = Resolver::new(&args.common)?;
    let cfg = r.resolve(&args.common)?;
    let u = r
        .opt_num(args.u, "u")?
        .ok_or_else(|| Error::InvalidParams("solve-psi needs --u".into()))?;
    let kernel = match &args.kernel_file {
        Some(path) => Kernel::Tabulated(TabulatedKernel::from_file(path)?),
        None => Kernel::power_law(cfg.params.alpha)?,
    };
    let sol = solve_psi(&kernel, &cfg.params, u, &cfg.solver)?;
    let headers = ["t", "psi"];
    let table: Vec<Vec<Cell>> = sol
        .times
        .iter()
        .zip(&sol.values)
        .map(|(t, v)| vec![Cell::Num(*t), Cell::Num(*v)])
        .collect();
    emit(&cfg, &headers, &table)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_) | Error::Parse(_) | Error::Io(_) => EXIT_VALIDATION,
        Error::Domain(_)
        | Error::Explosion { .. }
        | Error::HorizonTooShort { .. }
        | Error::Accuracy(_)
        | Error::Bracket(_) => EXIT_NUMERIC,
    }
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                _ => {
                    eprint!("{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.cmd {
        Cmd::Classify(a) => cmd_classify(a),
        Cmd::ExplosionSweep(a) => cmd_explosion_sweep(a),
        Cmd::AivsSweep(a) => cmd_aivs_sweep(a),
        Cmd::Mgf(a) => cmd_mgf(a),
        Cmd::SolvePsi(a) => cmd_solve_psi(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
