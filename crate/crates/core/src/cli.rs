//! Command-line front end.
//!
//! Every subcommand accepts the same option set. `--config <file>` reads flat
//! `key=value` lines whose keys are long option names (`k_tilde` and
//! `k-tilde` both work); options given on the command line win.
//!
//! Exit status: 0 on success, 1 for usage or validation errors, 2 for
//! runtime failures.

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::closed_form::{
    equilibrium_linear, equilibrium_log_at, equilibrium_power, stochastic_equilibrium,
};
use crate::error::Error;
use crate::experiments::{self, ExperimentResult, RunSettings, DEFAULT_SEED};
use crate::leverage::{
    stationarity_diagnostic, stationary_log_equation, stationary_rho_linear, stationary_rho_log,
    stationary_rho_power, thorp_rho,
};
use crate::model::{CapacitySpec, LeveragePolicy, ModelParams};
use crate::moments::{optimize_rho_numeric, phi_growth, rho_opt_first_order};
use crate::numerics::{bisect, RootBracket};
use crate::sde_engine::{ensemble_with, EnsembleConfig, StepScheme};

pub const FIGURES: [&str; 10] = [
    "logreturn-vs-rho",
    "kelly-vs-constant",
    "kelly-vs-constant-log",
    "zeroth-vs-first-order",
    "linear-regime",
    "return-functional",
    "rho-vs-k",
    "log-expectation",
    "pathwise-convergence",
    "second-order-mean",
];

#[derive(Debug, Parser)]
#[command(
    name = "kelly-capacity",
    version,
    about = "Kelly-optimal leverage with finite carrying capacity",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo ensemble under a leverage policy; writes simulate.csv
    Simulate(Options),
    /// Stochastic equilibrium at constant leverage
    Equilibrium(Options),
    /// Stationary optimal leverage at capital --k
    OptimalRho(Options),
    /// Short-horizon growth expansion and its optimum
    Moments(Options),
    /// Run one named experiment and write <out>/<name>.csv and .meta
    Figure {
        /// One of the experiment names listed by `all`
        name: String,
        #[command(flatten)]
        options: Options,
    },
    /// Run every experiment
    All(Options),
}

#[derive(Debug, Clone, Default, Args)]
struct Options {
    /// Flat key=value file of option defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long)]
    n_paths: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    k0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    k_tilde: Option<f64>,
    /// none, power (or linear), log, series
    #[arg(long)]
    capacity: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Series coefficients; for logreturn-vs-rho, the capacity strengths 1/K̃
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambdas: Option<Vec<f64>>,
    /// Exponents for the sweep experiments
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gammas: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Constant leverages compared against the Kelly policy
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rhos: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    delta_t: Option<f64>,
    /// Horizon
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Capital at which to evaluate a policy
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// constant, thorp, stationary-linear, stationary-power, stationary-log, moment-first-order
    #[arg(long)]
    policy: Option<String>,
    /// auto, direct, log-space
    #[arg(long)]
    scheme: Option<String>,
    /// Expansion order for `moments` (0 or 1)
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Domain { .. }
            | Error::Unknown { .. }
            | Error::UnsupportedCapacity { .. }
            | Error::UnsupportedOrder(_) => Failure::Invalid(e),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = match splice_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Parses a flat `key=value` file into `--key value` pairs. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{}`", i + 1, key));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Inserts options from `--config` right after the subcommand (and figure
/// name) so that later command-line occurrences override them.
fn splice_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = Some(strs.get(i + 1).cloned().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let pairs = parse_config(&text)?;
    if argv.len() < 2 {
        return Ok(argv);
    }
    let insert_at = if strs[1] == "figure" && strs.len() > 2 && !strs[2].starts_with('-') {
        3
    } else {
        2
    };
    let mut out: Vec<OsString> = argv[..insert_at].to_vec();
    for (k, v) in pairs {
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend_from_slice(&argv[insert_at..]);
    Ok(out)
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(o) => simulate(&o),
        Command::Equilibrium(o) => equilibrium(&o),
        Command::OptimalRho(o) => optimal_rho(&o),
        Command::Moments(o) => moments(&o),
        Command::Figure { name, options } => {
            let (res, secs) = run_figure(&name, &options)?;
            emit(&res, &options, secs)
        }
        Command::All(o) => {
            for name in FIGURES {
                let (res, secs) = run_figure(name, &o)?;
                emit(&res, &o, secs)?;
            }
            Ok(())
        }
    }
}

fn parse_capacity(o: &Options) -> Result<CapacitySpec, Failure> {
    let kind = match &o.capacity {
        Some(c) => c.as_str(),
        None if o.alpha.is_some() => "log",
        None if o.lambdas.is_some() => "series",
        None => "power",
    };
    Ok(match kind {
        "none" | "gbm" => CapacitySpec::None,
        "power" | "linear" => CapacitySpec::PowerLaw {
            gamma: o.gamma.unwrap_or(1.0),
        },
        "log" | "logarithmic" => CapacitySpec::Logarithmic {
            alpha: o.alpha.unwrap_or(1.0),
        },
        "series" => CapacitySpec::Series {
            gamma: o.gamma.unwrap_or(1.0),
            lambdas: o.lambdas.clone().unwrap_or_default(),
        },
        other => {
            return Err(Error::Unknown {
                kind: "capacity",
                name: other.to_string(),
            }
            .into())
        }
    })
}

fn model_params(o: &Options) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(
        o.mu.unwrap_or(1.0),
        o.sigma.unwrap_or(0.2),
        o.k0.unwrap_or(1.0),
        o.k_tilde.unwrap_or(10.0),
        parse_capacity(o)?,
    )?)
}

fn parse_policy(o: &Options) -> Result<LeveragePolicy, Failure> {
    let name = o.policy.as_deref().unwrap_or("constant");
    Ok(match name {
        "constant" => LeveragePolicy::Constant {
            rho: o.rho.unwrap_or(1.0),
        },
        "thorp" => LeveragePolicy::Thorp,
        "stationary-linear" => LeveragePolicy::StationaryLinear,
        "stationary-power" => LeveragePolicy::StationaryPower,
        "stationary-log" => LeveragePolicy::StationaryLog,
        "moment-first-order" => LeveragePolicy::MomentFirstOrder {
            delta_t: o.delta_t.unwrap_or(o.dt.unwrap_or(0.01)),
        },
        other => {
            return Err(Error::Unknown {
                kind: "policy",
                name: other.to_string(),
            }
            .into())
        }
    })
}

fn parse_scheme(o: &Options, default: StepScheme) -> Result<StepScheme, Failure> {
    Ok(match o.scheme.as_deref() {
        None => default,
        Some("auto") => StepScheme::Auto,
        Some("direct") => StepScheme::Direct,
        Some("log-space") | Some("log") => StepScheme::LogSpace,
        Some(other) => {
            return Err(Error::Unknown {
                kind: "scheme",
                name: other.to_string(),
            }
            .into())
        }
    })
}

fn run_settings(o: &Options, default_paths: usize) -> Result<RunSettings, Failure> {
    let dt = o.dt.unwrap_or(0.01);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "time step must be positive",
        }
        .into());
    }
    Ok(RunSettings {
        seed: o.seed.unwrap_or(DEFAULT_SEED),
        dt,
        n_paths: o.n_paths.unwrap_or(default_paths),
    })
}

fn simulate(o: &Options) -> Result<(), Failure> {
    let params = model_params(o)?;
    let policy = parse_policy(o)?;
    let run = run_settings(o, 2000)?;
    let horizon = o.t.unwrap_or(10.0);
    let seed = experiments::derive_seed(run.seed, "simulate");
    let cfg = EnsembleConfig::for_horizon(run.n_paths, seed, run.dt, horizon)
        .scheme(parse_scheme(o, StepScheme::Auto)?)
        .record_every(o.record_every.unwrap_or(1));
    let start = Instant::now();
    let stats = ensemble_with(&params, &policy, &cfg)?;
    let secs = start.elapsed().as_secs_f64();

    let mut res = ExperimentResult {
        name: "simulate".into(),
        columns: Vec::new(),
        metadata: Vec::new(),
        summary: Vec::new(),
    };
    let meta: [(&str, String); 12] = [
        ("master_seed", run.seed.to_string()),
        ("derived_seed", seed.to_string()),
        ("dt", run.dt.to_string()),
        ("n_paths", run.n_paths.to_string()),
        ("horizon", horizon.to_string()),
        ("mu", params.mu.to_string()),
        ("sigma", params.sigma.to_string()),
        ("k0", params.k0.to_string()),
        ("k_tilde", params.k_tilde.to_string()),
        ("capacity", format!("{:?}", params.capacity)),
        ("policy", format!("{policy:?}")),
        ("scheme", format!("{:?}", cfg.scheme)),
    ];
    res.metadata = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    res.summary = vec![
        ("terminal_mean_k".into(), stats.terminal_mean_k()),
        ("terminal_mean_log_k".into(), stats.terminal_mean_log_k()),
        ("failed_paths".into(), stats.failures.len() as f64),
    ];
    res.columns = vec![
        ("t".into(), stats.times),
        ("mean_k".into(), stats.mean_k),
        ("stderr_k".into(), stats.stderr_k),
        ("mean_log_k".into(), stats.mean_log_k),
        ("stderr_log_k".into(), stats.stderr_log_k),
    ];
    emit(&res, o, secs)
}

fn equilibrium(o: &Options) -> Result<(), Failure> {
    let params = model_params(o)?;
    let rho = o.rho.unwrap_or(1.0);
    let closed = match params.capacity {
        CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => equilibrium_linear(&params, rho)?,
        CapacitySpec::PowerLaw { .. } => equilibrium_power(&params, rho)?,
        CapacitySpec::Logarithmic { .. } => {
            let log_k = equilibrium_log_at(&params, rho)?;
            println!("log_equilibrium={log_k}");
            crate::closed_form::Equilibrium::Positive(log_k.exp())
        }
        _ => {
            return Err(Error::UnsupportedCapacity {
                operation: "equilibrium",
                capacity: params.capacity.name(),
            }
            .into())
        }
    };
    println!("equilibrium={}", closed.value());
    println!("positive={}", closed.is_positive());
    let root = stochastic_equilibrium(&params, rho)?;
    println!("root_check={}", root.value());
    Ok(())
}

fn optimal_rho(o: &Options) -> Result<(), Failure> {
    let params = model_params(o)?;
    let k = o.k.unwrap_or(params.k0);
    match params.capacity {
        CapacitySpec::Logarithmic { .. } => {
            let rho = stationary_rho_log(&params, k)?;
            let check = bisect(
                |r| stationary_log_equation(&params, k, r).unwrap_or(f64::NAN),
                RootBracket::new(1e-12, 1e6).with_tol(1e-14),
            )?;
            println!("rho={rho}");
            println!("bisection_check={check}");
            println!("difference={:e}", (rho - check).abs());
        }
        CapacitySpec::PowerLaw { gamma } => {
            if gamma == 1.0 {
                println!("rho={}", stationary_rho_linear(&params, k)?);
                println!("stationarity_diagnostic={}", stationarity_diagnostic(&params, k)?);
            }
            println!("rho_power_root={}", stationary_rho_power(&params, k)?);
        }
        _ => println!("rho={}", thorp_rho(params.mu, params.sigma)),
    }
    Ok(())
}

fn moments(o: &Options) -> Result<(), Failure> {
    let params = model_params(o)?;
    let delta_t = o.delta_t.unwrap_or(o.dt.unwrap_or(0.01));
    let order = o.order.unwrap_or(1);
    let best = optimize_rho_numeric(&params, delta_t, order)?;
    let rho = o.rho.unwrap_or(best.rho);
    println!("phi={}", phi_growth(&params, rho, delta_t, order)?);
    println!("rho_numeric={}", best.rho);
    println!("unimodal={}", best.unimodal);
    if let Ok(closed) = rho_opt_first_order(&params, delta_t) {
        println!("rho_first_order={closed}");
    }
    Ok(())
}

fn run_figure(name: &str, o: &Options) -> Result<(ExperimentResult, f64), Failure> {
    let start = Instant::now();
    let res = match name {
        "logreturn-vs-rho" => {
            let mut c = experiments::LogReturnConfig {
                run: run_settings(o, 2000)?,
                ..Default::default()
            };
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.horizon, o.t);
            if let Some(l) = &o.lambdas {
                c.lambdas = l.clone();
            }
            c.scheme = parse_scheme(o, c.scheme)?;
            experiments::logreturn_vs_rho(&c)?
        }
        "kelly-vs-constant" | "kelly-vs-constant-log" => {
            let mut c = if name.ends_with("log") {
                experiments::KellyVsConstantConfig::logarithmic()
            } else {
                experiments::KellyVsConstantConfig::linear()
            };
            c.run = run_settings(o, 2000)?;
            let p = &mut c.params;
            set(&mut p.mu, o.mu);
            set(&mut p.sigma, o.sigma);
            set(&mut p.k0, o.k0);
            set(&mut p.k_tilde, o.k_tilde);
            match &mut p.capacity {
                CapacitySpec::Logarithmic { alpha } => set(alpha, o.alpha),
                CapacitySpec::PowerLaw { gamma } => {
                    set(gamma, o.gamma);
                    if *gamma != 1.0 {
                        c.policy = LeveragePolicy::StationaryPower;
                    }
                }
                _ => {}
            }
            p.validate()?;
            set(&mut c.horizon, o.t);
            if let Some(r) = &o.rhos {
                c.constant_rhos = r.clone();
            }
            if let Some(e) = o.record_every {
                c.record_every = e;
            }
            c.scheme = parse_scheme(o, c.scheme)?;
            experiments::kelly_vs_constant(&c)?
        }
        "zeroth-vs-first-order" => {
            let mut c = experiments::ZerothFirstConfig::default();
            c.run = run_settings(o, c.run.n_paths)?;
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.delta_t, o.delta_t);
            set(&mut c.horizon, o.t);
            c.scheme = parse_scheme(o, c.scheme)?;
            experiments::zeroth_vs_first_order(&c)?
        }
        "linear-regime" => {
            let mut c = experiments::LinearRegimeConfig {
                run: run_settings(o, 2000)?,
                ..Default::default()
            };
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.alpha, o.alpha);
            set(&mut c.horizon, o.t);
            experiments::linear_regime(&c)?
        }
        "return-functional" => {
            let mut c = experiments::ReturnFunctionalConfig::default();
            set(&mut c.mu, o.mu);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.alpha, o.alpha);
            if let Some(g) = &o.gammas {
                c.gammas = g.clone();
            }
            experiments::return_functional_sweep(&c)?
        }
        "rho-vs-k" => {
            let mut c = experiments::RhoVsKConfig::default();
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.alpha, o.alpha);
            if let Some(g) = &o.gammas {
                c.gammas = g.clone();
            }
            experiments::rho_vs_k_sweep(&c)?
        }
        "log-expectation" => {
            let mut c = experiments::LogExpectationConfig {
                run: run_settings(o, 2000)?,
                ..Default::default()
            };
            set(&mut c.alpha, o.alpha);
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.horizon, o.t);
            experiments::log_expectation(&c)?
        }
        "pathwise-convergence" => {
            let mut c = experiments::PathwiseConvergenceConfig::default();
            c.seed = o.seed.unwrap_or(DEFAULT_SEED);
            if let Some(n) = o.n_paths {
                c.n_paths = n;
            }
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.rho, o.rho);
            set(&mut c.alpha, o.alpha);
            set(&mut c.horizon, o.t);
            experiments::pathwise_convergence(&c)?
        }
        "second-order-mean" => {
            let mut c = experiments::SecondOrderMeanConfig::default();
            c.run = run_settings(o, c.run.n_paths)?;
            set(&mut c.mu, o.mu);
            set(&mut c.sigma, o.sigma);
            set(&mut c.k0, o.k0);
            set(&mut c.k_tilde, o.k_tilde);
            set(&mut c.rho, o.rho);
            set(&mut c.delta_t, o.delta_t);
            experiments::second_order_mean(&c)?
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown figure `{other}`; expected one of: {}",
                FIGURES.join(", ")
            )))
        }
    };
    Ok((res, start.elapsed().as_secs_f64()))
}

fn set(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn emit(res: &ExperimentResult, o: &Options, secs: f64) -> Result<(), Failure> {
    let dir = o.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let (csv_path, meta_path) = write_result(res, &dir, secs)?;
    println!("{}: wrote {} and {}", res.name, csv_path.display(), meta_path.display());
    for (k, v) in &res.summary {
        println!("  {k} = {v}");
    }
    Ok(())
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta`.
pub fn write_result(res: &ExperimentResult, dir: &Path, wall_clock: f64) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", res.name));
    let meta_path = dir.join(format!("{}.meta", res.name));

    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(res.columns.iter().map(|(n, _)| n.as_str()))?;
    let rows = res.columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for i in 0..rows {
        w.write_record(res.columns.iter().map(|(_, v)| {
            v.get(i).map(|x| format!("{x:.16e}")).unwrap_or_default()
        }))?;
    }
    w.flush()?;

    let mut meta = format!("experiment={}\n", res.name);
    for (k, v) in &res.metadata {
        meta.push_str(&format!("{k}={v}\n"));
    }
    for (k, v) in &res.summary {
        meta.push_str(&format!("summary.{k}={v:.16e}\n"));
    }
    meta.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
    meta.push_str(&format!("wall_clock_seconds={wall_clock:.3}\n"));
    fs::write(&meta_path, meta)?;
    Ok((csv_path, meta_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let pairs = parse_config("# comment\n\nmu = 0.5\nk_tilde=20\n").unwrap();
        assert_eq!(
            pairs,
            vec![("mu".to_string(), "0.5".to_string()), ("k-tilde".to_string(), "20".to_string())]
        );
        assert!(parse_config("mu 0.5").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn splice_places_config_before_flags() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.cfg");
        fs::write(&file, "mu=0.5\n").unwrap();
        let argv: Vec<OsString> = ["kc", "figure", "rho-vs-k", "--config", file.to_str().unwrap(), "--mu", "2"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = splice_config(argv).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[..5], &["kc", "figure", "rho-vs-k", "--mu", "0.5"]);
        let cli = Cli::try_parse_from(out).unwrap();
        match cli.command {
            Command::Figure { options, .. } => assert_eq!(options.mu, Some(2.0)),
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["kc", "frobnicate"]), 1);
        assert_eq!(run(["kc", "equilibrium", "--no-such-flag", "1"]), 1);
        assert_eq!(run(["kc", "equilibrium", "--sigma", "-1"]), 1);
        assert_eq!(run(["kc", "equilibrium", "--capacity", "cubic"]), 1);
        assert_eq!(run(["kc", "equilibrium", "--mu", "0.1", "--sigma", "0.1", "--k-tilde", "10"]), 0);
    }
}
