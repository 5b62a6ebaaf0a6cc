//! Experiment drivers producing tabular results.
//!
//! Each experiment has a config whose defaults are the reference parameter
//! values; the master seed is mixed with the experiment name so that
//! different experiments never share random streams, while strategies within
//! one experiment do (common random numbers).

use std::fmt::Display;

use crate::closed_form::{
    equilibrium_linear, equilibrium_log_at, exact_linear_path, exact_log_path, expected_log_k_log,
    mean_k_second_order,
};
use crate::error::{Error, Result};
use crate::leverage::{
    asymptotic_slope, stationary_rho_linear, stationary_rho_log, stationary_rho_power, thorp_rho,
    CapacityKind,
};
use crate::model::{return_functional, CapacitySpec, LeveragePolicy, ModelParams};
use crate::sde_engine::{
    ensemble_with, map_paths, mean_and_stderr, paired_difference, simulate_with, BrownianPath,
    EnsembleConfig, StepScheme,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    /// Equal-length named columns.
    pub columns: Vec<(String, Vec<f64>)>,
    /// Everything needed to rerun the experiment.
    pub metadata: Vec<(String, String)>,
    pub summary: Vec<(String, f64)>,
}

impl ExperimentResult {
    fn new(name: &str) -> Self {
        ExperimentResult {
            name: name.to_string(),
            columns: Vec::new(),
            metadata: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn col(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push((name.into(), values));
    }

    fn meta(&mut self, key: impl Into<String>, value: impl Display) {
        self.metadata.push((key.into(), value.to_string()));
    }

    fn sum(&mut self, key: impl Into<String>, value: f64) {
        self.summary.push((key.into(), value));
    }

    fn params_meta(&mut self, p: &ModelParams) {
        self.meta("mu", p.mu);
        self.meta("sigma", p.sigma);
        self.meta("k0", p.k0);
        self.meta("k_tilde", p.k_tilde);
        self.meta("capacity", p.capacity.name());
        match &p.capacity {
            CapacitySpec::None => {}
            CapacitySpec::PowerLaw { gamma } => self.meta("gamma", gamma),
            CapacitySpec::Logarithmic { alpha } => self.meta("alpha", alpha),
            CapacitySpec::Series { gamma, lambdas } => {
                self.meta("gamma", gamma);
                self.meta("lambdas", join(lambdas));
            }
        }
    }

    fn run_meta(&mut self, run: &RunSettings, derived: u64) {
        self.meta("master_seed", run.seed);
        self.meta("derived_seed", derived);
        self.meta("dt", run.dt);
        self.meta("n_paths", run.n_paths);
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn scheme_name(s: StepScheme) -> &'static str {
    match s {
        StepScheme::Auto => "auto",
        StepScheme::Direct => "direct",
        StepScheme::LogSpace => "log-space",
    }
}

/// FNV-1a over the experiment name followed by the master seed.
pub fn derive_seed(master_seed: u64, name: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    name.bytes()
        .chain(master_seed.to_le_bytes())
        .fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Monte Carlo settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub dt: f64,
    pub n_paths: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seed: DEFAULT_SEED,
            dt: 0.01,
            n_paths: 2000,
        }
    }
}

impl RunSettings {
    fn ensemble(&self, derived: u64, horizon: f64) -> EnsembleConfig {
        EnsembleConfig::for_horizon(self.n_paths, derived, self.dt, horizon)
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn argmax(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn linear_params(mu: f64, sigma: f64, k0: f64, k_tilde: f64) -> Result<ModelParams> {
    ModelParams::new(mu, sigma, k0, k_tilde, CapacitySpec::PowerLaw { gamma: 1.0 })
}

fn log_params(alpha: f64, mu: f64, sigma: f64, k0: f64, k_tilde: f64) -> Result<ModelParams> {
    ModelParams::new(mu, sigma, k0, k_tilde, CapacitySpec::Logarithmic { alpha })
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}

// ---------------------------------------------------------------------------

/// Terminal `⟨log K⟩` against constant leverage for several capacity
/// strengths `λ = 1/K̃` (linear capacity; `λ = 0` is plain GBM).
#[derive(Debug, Clone, PartialEq)]
pub struct LogReturnConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub horizon: f64,
    pub lambdas: Vec<f64>,
    pub rho_grid: Vec<f64>,
    /// Log-space stepping keeps large-leverage paths positive; for constant
    /// leverage on GBM it is exact.
    pub scheme: StepScheme,
    pub run: RunSettings,
}

impl Default for LogReturnConfig {
    fn default() -> Self {
        LogReturnConfig {
            mu: 2.0,
            sigma: 1.0,
            k0: 1.0,
            horizon: 1.0,
            lambdas: vec![0.0, 0.1, 0.5, 1.0],
            rho_grid: (1..=40).map(|i| i as f64 / 10.0).collect(),
            scheme: StepScheme::LogSpace,
            run: RunSettings::default(),
        }
    }
}

pub fn logreturn_vs_rho(cfg: &LogReturnConfig) -> Result<ExperimentResult> {
    const NAME: &str = "logreturn-vs-rho";
    if cfg.rho_grid.is_empty() || cfg.lambdas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "rho_grid",
            value: 0.0,
            reason: "grids must be non-empty",
        });
    }
    require_positive("horizon", cfg.horizon)?;
    let seed = derive_seed(cfg.run.seed, NAME);
    let ens = cfg.run.ensemble(seed, cfg.horizon).scheme(cfg.scheme);
    let ens = EnsembleConfig {
        record_every: ens.n_steps,
        ..ens
    };

    let mut res = ExperimentResult::new(NAME);
    res.run_meta(&cfg.run, seed);
    res.meta("mu", cfg.mu);
    res.meta("sigma", cfg.sigma);
    res.meta("k0", cfg.k0);
    res.meta("gamma", 1.0);
    res.meta("horizon", cfg.horizon);
    res.meta("lambdas", join(&cfg.lambdas));
    res.meta("rho_grid", join(&cfg.rho_grid));
    res.meta("scheme", scheme_name(cfg.scheme));
    res.col("rho", cfg.rho_grid.clone());
    res.sum("thorp_rho", thorp_rho(cfg.mu, cfg.sigma));

    for &lambda in &cfg.lambdas {
        let params = if lambda == 0.0 {
            ModelParams::new(cfg.mu, cfg.sigma, cfg.k0, 1.0, CapacitySpec::None)?
        } else {
            linear_params(cfg.mu, cfg.sigma, cfg.k0, 1.0 / lambda)?
        };
        let mut means = Vec::with_capacity(cfg.rho_grid.len());
        let mut errs = Vec::with_capacity(cfg.rho_grid.len());
        for &rho in &cfg.rho_grid {
            let stats = ensemble_with(&params, &LeveragePolicy::Constant { rho }, &ens)?;
            means.push(stats.terminal_mean_log_k());
            errs.push(*stats.stderr_log_k.last().unwrap());
        }
        let best = cfg.rho_grid[argmax(&means)];
        res.sum(format!("argmax_rho_lambda_{lambda}"), best);
        res.col(format!("mean_log_k_lambda_{lambda}"), means);
        res.col(format!("stderr_log_k_lambda_{lambda}"), errs);
    }
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Dynamic Kelly policy against a set of constant leverages.
#[derive(Debug, Clone, PartialEq)]
pub struct KellyVsConstantConfig {
    pub params: ModelParams,
    pub policy: LeveragePolicy,
    pub constant_rhos: Vec<f64>,
    pub horizon: f64,
    /// Fraction of the horizon, counted from the end, used for the plateau
    /// average.
    pub plateau_fraction: f64,
    pub record_every: usize,
    pub scheme: StepScheme,
    pub run: RunSettings,
}

impl KellyVsConstantConfig {
    pub fn linear() -> Self {
        KellyVsConstantConfig {
            params: linear_params(0.1, 0.1, 1.0, 10.0).expect("valid defaults"),
            policy: LeveragePolicy::StationaryLinear,
            constant_rhos: vec![1.0, 0.8, 0.6, 0.4, 0.2],
            horizon: 60.0,
            plateau_fraction: 0.2,
            record_every: 10,
            scheme: StepScheme::Auto,
            run: RunSettings::default(),
        }
    }

    pub fn logarithmic() -> Self {
        KellyVsConstantConfig {
            params: log_params(1.0, 0.1, 0.1, 1.0, 10.0).expect("valid defaults"),
            policy: LeveragePolicy::StationaryLog,
            ..Self::linear()
        }
    }

    pub fn name(&self) -> &'static str {
        match self.params.capacity {
            CapacitySpec::Logarithmic { .. } => "kelly-vs-constant-log",
            _ => "kelly-vs-constant",
        }
    }
}

fn rho_label(rho: f64) -> String {
    format!("rho_{rho}")
}

pub fn kelly_vs_constant(cfg: &KellyVsConstantConfig) -> Result<ExperimentResult> {
    let name = cfg.name();
    require_positive("horizon", cfg.horizon)?;
    if !(cfg.plateau_fraction > 0.0 && cfg.plateau_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "plateau_fraction",
            value: cfg.plateau_fraction,
            reason: "must lie in (0, 1]",
        });
    }
    let seed = derive_seed(cfg.run.seed, name);
    let ens = cfg
        .run
        .ensemble(seed, cfg.horizon)
        .scheme(cfg.scheme)
        .record_every(cfg.record_every);
    let window_start = cfg.horizon * (1.0 - cfg.plateau_fraction);

    let mut res = ExperimentResult::new(name);
    res.run_meta(&cfg.run, seed);
    res.params_meta(&cfg.params);
    res.meta("policy", cfg.policy.name());
    res.meta("constant_rhos", join(&cfg.constant_rhos));
    res.meta("horizon", cfg.horizon);
    res.meta("plateau_fraction", cfg.plateau_fraction);
    res.meta("record_every", cfg.record_every);
    res.meta("scheme", scheme_name(cfg.scheme));

    let mut strategies = vec![("kelly".to_string(), cfg.policy)];
    strategies.extend(
        cfg.constant_rhos
            .iter()
            .map(|&rho| (rho_label(rho), LeveragePolicy::Constant { rho })),
    );

    let mut terminals = Vec::new();
    for (i, (label, policy)) in strategies.iter().enumerate() {
        let stats = ensemble_with(&cfg.params, policy, &ens)?;
        if i == 0 {
            res.col("t", stats.times.clone());
        }
        res.sum(format!("terminal_mean_log_k_{label}"), stats.terminal_mean_log_k());
        res.sum(format!("terminal_mean_k_{label}"), stats.terminal_mean_k());

        let plateau = map_paths(&cfg.params, policy, &ens, |traj| {
            let (sum, n) = traj
                .times
                .iter()
                .zip(&traj.k_values)
                .filter(|(t, _)| **t >= window_start - 1e-9)
                .fold((0.0, 0usize), |(s, n), (_, k)| (s + k, n + 1));
            sum / n as f64
        })?;
        let plateau: Vec<f64> = plateau.into_iter().flatten().collect();
        let (mean, se) = mean_and_stderr(&plateau);
        res.sum(format!("plateau_mean_k_{label}"), mean);
        res.sum(format!("plateau_stderr_k_{label}"), se);

        res.col(format!("mean_k_{label}"), stats.mean_k);
        res.col(format!("stderr_k_{label}"), stats.stderr_k);
        res.col(format!("mean_log_k_{label}"), stats.mean_log_k);
        res.col(format!("stderr_log_k_{label}"), stats.stderr_log_k);
        terminals.push(stats.terminal_k);
    }

    for (j, &rho) in cfg.constant_rhos.iter().enumerate() {
        let label = rho_label(rho);
        let (diff, se) = paired_difference(&terminals[0], &terminals[j + 1], f64::ln);
        res.sum(format!("paired_diff_log_k_{label}"), diff);
        res.sum(format!("paired_stderr_log_k_{label}"), se);
        let eq = match cfg.params.capacity {
            CapacitySpec::Logarithmic { .. } => equilibrium_log_at(&cfg.params, rho)?.exp(),
            CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => {
                equilibrium_linear(&cfg.params, rho)?.value()
            }
            _ => f64::NAN,
        };
        res.sum(format!("equilibrium_k_{label}"), eq);
    }
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Moment-based leverage at zeroth and first order in the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ZerothFirstConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k_tilde: f64,
    pub delta_t: f64,
    pub horizon: f64,
    pub record_every: usize,
    /// Log-space by default: at `ρ ≈ 17` a direct Euler step can overshoot
    /// below zero.
    pub scheme: StepScheme,
    pub run: RunSettings,
}

impl Default for ZerothFirstConfig {
    fn default() -> Self {
        ZerothFirstConfig {
            mu: 1.0,
            sigma: 0.2,
            k0: 1.0,
            k_tilde: 100.0,
            delta_t: 0.01,
            horizon: 5.0,
            record_every: 10,
            scheme: StepScheme::LogSpace,
            run: RunSettings {
                n_paths: 1000,
                ..RunSettings::default()
            },
        }
    }
}

pub fn zeroth_vs_first_order(cfg: &ZerothFirstConfig) -> Result<ExperimentResult> {
    const NAME: &str = "zeroth-vs-first-order";
    require_positive("horizon", cfg.horizon)?;
    let params = linear_params(cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let seed = derive_seed(cfg.run.seed, NAME);
    let ens = cfg
        .run
        .ensemble(seed, cfg.horizon)
        .scheme(cfg.scheme)
        .record_every(cfg.record_every);

    let mut res = ExperimentResult::new(NAME);
    res.run_meta(&cfg.run, seed);
    res.params_meta(&params);
    res.meta("delta_t", cfg.delta_t);
    res.meta("horizon", cfg.horizon);
    res.meta("record_every", cfg.record_every);
    res.meta("scheme", scheme_name(cfg.scheme));

    let zeroth = ensemble_with(&params, &LeveragePolicy::MomentFirstOrder { delta_t: 0.0 }, &ens)?;
    let first = ensemble_with(
        &params,
        &LeveragePolicy::MomentFirstOrder {
            delta_t: cfg.delta_t,
        },
        &ens,
    )?;
    let (diff, se) = paired_difference(&first.terminal_k, &zeroth.terminal_k, |k| k);
    let (diff_log, se_log) = paired_difference(&first.terminal_k, &zeroth.terminal_k, f64::ln);
    res.sum("terminal_mean_k_zeroth", zeroth.terminal_mean_k());
    res.sum("terminal_mean_k_first", first.terminal_mean_k());
    res.sum("paired_diff_k", diff);
    res.sum("paired_stderr_k", se);
    res.sum("paired_diff_log_k", diff_log);
    res.sum("paired_stderr_log_k", se_log);

    res.col("t", zeroth.times.clone());
    res.col("mean_k_zeroth", zeroth.mean_k);
    res.col("stderr_k_zeroth", zeroth.stderr_k);
    res.col("mean_k_first", first.mean_k);
    res.col("stderr_k_first", first.stderr_k);
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Late-time growth of `⟨K⟩` under the Kelly policies for linear and
/// logarithmic capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegimeConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k_tilde: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// Trailing fraction of the horizon used for the slope fit.
    pub fit_fraction: f64,
    pub record_every: usize,
    pub run: RunSettings,
}

impl Default for LinearRegimeConfig {
    fn default() -> Self {
        LinearRegimeConfig {
            mu: 1.0,
            sigma: 0.2,
            k0: 1.0,
            k_tilde: 10.0,
            alpha: 1.0,
            horizon: 7.0,
            fit_fraction: 0.5,
            record_every: 10,
            run: RunSettings::default(),
        }
    }
}

pub fn linear_regime(cfg: &LinearRegimeConfig) -> Result<ExperimentResult> {
    const NAME: &str = "linear-regime";
    if !(cfg.horizon >= 5.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: cfg.horizon,
            reason: "the asymptotic window needs T ≥ 5",
        });
    }
    let linear = linear_params(cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let log = log_params(cfg.alpha, cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let seed = derive_seed(cfg.run.seed, NAME);
    let ens = cfg.run.ensemble(seed, cfg.horizon).record_every(cfg.record_every);

    let mut res = ExperimentResult::new(NAME);
    res.run_meta(&cfg.run, seed);
    res.meta("mu", cfg.mu);
    res.meta("sigma", cfg.sigma);
    res.meta("k0", cfg.k0);
    res.meta("k_tilde", cfg.k_tilde);
    res.meta("alpha", cfg.alpha);
    res.meta("horizon", cfg.horizon);
    res.meta("fit_fraction", cfg.fit_fraction);
    res.meta("record_every", cfg.record_every);

    let lin = ensemble_with(&linear, &LeveragePolicy::StationaryLinear, &ens)?;
    let lg = ensemble_with(&log, &LeveragePolicy::StationaryLog, &ens)?;
    let start = cfg.horizon * (1.0 - cfg.fit_fraction) - 1e-9;
    let fit = |times: &[f64], ks: &[f64]| {
        let (x, y): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(ks)
            .filter(|(t, _)| **t >= start)
            .map(|(t, k)| (*t, *k))
            .unzip();
        ols_slope(&x, &y)
    };
    let slope_lin = fit(&lin.times, &lin.mean_k);
    let slope_log = fit(&lg.times, &lg.mean_k);
    res.sum("fitted_slope_linear", slope_lin);
    res.sum("predicted_slope_linear", asymptotic_slope(&linear, CapacityKind::Linear));
    res.sum("fitted_slope_log", slope_log);
    res.sum("predicted_slope_log", asymptotic_slope(&log, CapacityKind::Logarithmic));
    res.sum("slope_ratio", slope_log / slope_lin);

    res.col("t", lin.times.clone());
    res.col("mean_k_linear", lin.mean_k);
    res.col("stderr_k_linear", lin.stderr_k);
    res.col("mean_k_log", lg.mean_k);
    res.col("stderr_k_log", lg.stderr_k);
    Ok(res)
}

// ---------------------------------------------------------------------------

/// `K μ̂(K)` at unit leverage for several capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnFunctionalConfig {
    pub mu: f64,
    pub k_tilde: f64,
    pub gammas: Vec<f64>,
    pub alpha: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_points: usize,
}

impl Default for ReturnFunctionalConfig {
    fn default() -> Self {
        ReturnFunctionalConfig {
            mu: 1.0,
            k_tilde: 10.0,
            gammas: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            alpha: 1.0,
            k_min: 0.05,
            k_max: 30.0,
            n_points: 600,
        }
    }
}

/// Linear interpolation of the first downward zero crossing.
fn first_zero_crossing(x: &[f64], y: &[f64]) -> f64 {
    for i in 1..x.len() {
        if y[i - 1] > 0.0 && y[i] <= 0.0 {
            return x[i - 1] + (x[i] - x[i - 1]) * y[i - 1] / (y[i - 1] - y[i]);
        }
    }
    f64::NAN
}

pub fn return_functional_sweep(cfg: &ReturnFunctionalConfig) -> Result<ExperimentResult> {
    const NAME: &str = "return-functional";
    require_positive("k_min", cfg.k_min)?;
    if !(cfg.k_max > cfg.k_min) || cfg.n_points < 2 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            value: cfg.k_max,
            reason: "need k_max > k_min and at least two points",
        });
    }
    let ks: Vec<f64> = (0..cfg.n_points)
        .map(|i| cfg.k_min + (cfg.k_max - cfg.k_min) * i as f64 / (cfg.n_points - 1) as f64)
        .collect();

    let mut res = ExperimentResult::new(NAME);
    res.meta("mu", cfg.mu);
    res.meta("k_tilde", cfg.k_tilde);
    res.meta("gammas", join(&cfg.gammas));
    res.meta("alpha", cfg.alpha);
    res.meta("k_min", cfg.k_min);
    res.meta("k_max", cfg.k_max);
    res.meta("n_points", cfg.n_points);
    res.col("k", ks.clone());

    for &gamma in &cfg.gammas {
        let p = ModelParams::new(cfg.mu, 1.0, 1.0, cfg.k_tilde, CapacitySpec::PowerLaw { gamma })?;
        let ys = ks
            .iter()
            .map(|&k| return_functional(&p, k))
            .collect::<Result<Vec<_>>>()?;
        res.sum(format!("zero_crossing_gamma_{gamma}"), first_zero_crossing(&ks, &ys));
        res.col(format!("power_gamma_{gamma}"), ys);
    }
    let p = log_params(cfg.alpha, cfg.mu, 1.0, 1.0, cfg.k_tilde)?;
    let ys = ks
        .iter()
        .map(|&k| return_functional(&p, k))
        .collect::<Result<Vec<_>>>()?;
    res.sum("zero_crossing_log", first_zero_crossing(&ks, &ys));
    res.sum("predicted_zero_power", cfg.k_tilde);
    res.sum("predicted_zero_log", cfg.k_tilde * (1.0 / cfg.alpha).exp());
    res.col(format!("log_alpha_{}", cfg.alpha), ys);
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Stationary optimal leverage as a function of capital.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoVsKConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k_tilde: f64,
    pub gammas: Vec<f64>,
    pub alpha: f64,
    pub k_min: f64,
    pub k_max: f64,
    /// Points on a logarithmic grid.
    pub n_points: usize,
}

impl Default for RhoVsKConfig {
    fn default() -> Self {
        RhoVsKConfig {
            mu: 1.0,
            sigma: 0.2,
            k_tilde: 50.0,
            gammas: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            alpha: 1.0,
            k_min: 0.01,
            k_max: 1000.0,
            n_points: 241,
        }
    }
}

pub fn rho_vs_k_sweep(cfg: &RhoVsKConfig) -> Result<ExperimentResult> {
    const NAME: &str = "rho-vs-k";
    require_positive("k_min", cfg.k_min)?;
    if !(cfg.k_max > cfg.k_min) || cfg.n_points < 2 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            value: cfg.k_max,
            reason: "need k_max > k_min and at least two points",
        });
    }
    let (a, b) = (cfg.k_min.ln(), cfg.k_max.ln());
    let ks: Vec<f64> = (0..cfg.n_points)
        .map(|i| (a + (b - a) * i as f64 / (cfg.n_points - 1) as f64).exp())
        .collect();

    let mut res = ExperimentResult::new(NAME);
    res.meta("mu", cfg.mu);
    res.meta("sigma", cfg.sigma);
    res.meta("k_tilde", cfg.k_tilde);
    res.meta("gammas", join(&cfg.gammas));
    res.meta("alpha", cfg.alpha);
    res.meta("k_min", cfg.k_min);
    res.meta("k_max", cfg.k_max);
    res.meta("n_points", cfg.n_points);
    res.col("k", ks.clone());
    res.sum("thorp_rho", thorp_rho(cfg.mu, cfg.sigma));

    for &gamma in &cfg.gammas {
        let p = ModelParams::new(cfg.mu, cfg.sigma, 1.0, cfg.k_tilde, CapacitySpec::PowerLaw { gamma })?;
        let rhos = ks
            .iter()
            .map(|&k| stationary_rho_power(&p, k))
            .collect::<Result<Vec<_>>>()?;
        res.sum(format!("rho_at_k_min_gamma_{gamma}"), rhos[0]);
        res.sum(format!("k_rho_over_k_tilde_at_k_max_gamma_{gamma}"), rhos[rhos.len() - 1] * cfg.k_max / cfg.k_tilde);
        res.col(format!("rho_power_gamma_{gamma}"), rhos);
    }
    let lin = linear_params(cfg.mu, cfg.sigma, 1.0, cfg.k_tilde)?;
    res.col(
        "rho_stationary_linear",
        ks.iter()
            .map(|&k| stationary_rho_linear(&lin, k))
            .collect::<Result<Vec<_>>>()?,
    );
    let lg = log_params(cfg.alpha, cfg.mu, cfg.sigma, 1.0, cfg.k_tilde)?;
    res.col(
        format!("rho_log_alpha_{}", cfg.alpha),
        ks.iter()
            .map(|&k| stationary_rho_log(&lg, k))
            .collect::<Result<Vec<_>>>()?,
    );
    res.col("k_tilde_over_k", ks.iter().map(|k| cfg.k_tilde / k).collect());
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Monte Carlo `⟨log K(t)⟩` under logarithmic capacity against the analytic
/// curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LogExpectationConfig {
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k_tilde: f64,
    pub horizon: f64,
    /// Number of evenly spaced output times after `t = 0`.
    pub n_times: usize,
    pub run: RunSettings,
}

impl Default for LogExpectationConfig {
    fn default() -> Self {
        LogExpectationConfig {
            alpha: 1.0,
            mu: 0.1,
            sigma: 0.1,
            k0: 1.0,
            k_tilde: 10.0,
            horizon: 60.0,
            n_times: 10,
            run: RunSettings::default(),
        }
    }
}

pub fn log_expectation(cfg: &LogExpectationConfig) -> Result<ExperimentResult> {
    const NAME: &str = "log-expectation";
    require_positive("horizon", cfg.horizon)?;
    let params = log_params(cfg.alpha, cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let seed = derive_seed(cfg.run.seed, NAME);
    let ens = cfg.run.ensemble(seed, cfg.horizon);
    if cfg.n_times == 0 || ens.n_steps % cfg.n_times != 0 {
        return Err(Error::InvalidParameter {
            name: "n_times",
            value: cfg.n_times as f64,
            reason: "must divide the number of steps",
        });
    }
    let every = ens.n_steps / cfg.n_times;
    let ens = ens.record_every(every);
    let stats = ensemble_with(&params, &LeveragePolicy::Constant { rho: 1.0 }, &ens)?;
    let analytic = stats
        .times
        .iter()
        .map(|&t| expected_log_k_log(&params, t))
        .collect::<Result<Vec<_>>>()?;

    let mut res = ExperimentResult::new(NAME);
    res.run_meta(&cfg.run, seed);
    res.params_meta(&params);
    res.meta("horizon", cfg.horizon);
    res.meta("n_times", cfg.n_times);
    let z = stats
        .mean_log_k
        .iter()
        .zip(&analytic)
        .zip(&stats.stderr_log_k)
        .skip(1)
        .map(|((m, a), s)| (m - a).abs() / s)
        .fold(0.0, f64::max);
    res.sum("max_abs_z", z);
    res.sum("asymptote", expected_log_k_log(&params, f64::INFINITY)?);
    res.col("t", stats.times);
    res.col("mean_log_k", stats.mean_log_k);
    res.col("stderr_log_k", stats.stderr_log_k);
    res.col("expected_log_k", analytic);
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Pathwise error of Euler–Maruyama against the exact solutions, driven by
/// one Brownian path per sample observed at several resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct PathwiseConvergenceConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k_tilde: f64,
    pub rho: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// Coarse to fine; each must be an integer multiple of the finest.
    pub dts: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for PathwiseConvergenceConfig {
    fn default() -> Self {
        PathwiseConvergenceConfig {
            mu: 1.0,
            sigma: 0.2,
            k0: 1.0,
            k_tilde: 10.0,
            rho: 1.0,
            alpha: 1.0,
            horizon: 1.0,
            dts: vec![0.02, 0.01, 0.005],
            n_paths: 100,
            seed: DEFAULT_SEED,
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn pathwise_convergence(cfg: &PathwiseConvergenceConfig) -> Result<ExperimentResult> {
    const NAME: &str = "pathwise-convergence";
    require_positive("horizon", cfg.horizon)?;
    if cfg.dts.len() < 2 || cfg.n_paths == 0 {
        return Err(Error::InvalidParameter {
            name: "dts",
            value: cfg.dts.len() as f64,
            reason: "need at least two step sizes and one path",
        });
    }
    let linear = linear_params(cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let log = log_params(cfg.alpha, cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let finest = cfg.dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let n_fine = (cfg.horizon / finest).round() as usize;
    let factors = cfg
        .dts
        .iter()
        .map(|&dt| {
            let f = (dt / finest).round();
            if (f * finest - dt).abs() > 1e-9 * dt {
                Err(Error::InvalidParameter {
                    name: "dts",
                    value: dt,
                    reason: "must be an integer multiple of the finest step",
                })
            } else {
                Ok(f as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let seed = derive_seed(cfg.seed, NAME);
    let constant = LeveragePolicy::Constant { rho: cfg.rho };
    let unit = LeveragePolicy::Constant { rho: 1.0 };

    let mut lin_err = vec![Vec::with_capacity(cfg.n_paths); cfg.dts.len()];
    let mut log_err = vec![Vec::with_capacity(cfg.n_paths); cfg.dts.len()];
    for i in 0..cfg.n_paths as u64 {
        let fine = BrownianPath::generate(seed, i, finest, n_fine)?;
        for (j, &factor) in factors.iter().enumerate() {
            let path = fine.coarsen(factor)?;
            let euler = simulate_with(&linear, &constant, &path, StepScheme::Direct)?.terminal();
            let exact = exact_linear_path(&linear, cfg.rho, &path)?.terminal();
            lin_err[j].push((euler - exact).abs() / exact);

            let euler = simulate_with(&log, &unit, &path, StepScheme::LogSpace)?.terminal();
            let exact = exact_log_path(&log, &path)?.terminal();
            log_err[j].push((euler.ln() - exact.ln()).abs());
        }
    }
    let lin_med: Vec<f64> = lin_err.into_iter().map(median).collect();
    let log_med: Vec<f64> = log_err.into_iter().map(median).collect();

    let mut res = ExperimentResult::new(NAME);
    res.meta("master_seed", cfg.seed);
    res.meta("derived_seed", seed);
    res.meta("n_paths", cfg.n_paths);
    res.meta("dts", join(&cfg.dts));
    res.meta("mu", cfg.mu);
    res.meta("sigma", cfg.sigma);
    res.meta("k0", cfg.k0);
    res.meta("k_tilde", cfg.k_tilde);
    res.meta("rho", cfg.rho);
    res.meta("alpha", cfg.alpha);
    res.meta("horizon", cfg.horizon);
    let last = cfg.dts.len() - 1;
    res.sum("error_ratio_linear", lin_med[0] / lin_med[last]);
    res.sum("error_ratio_log", log_med[0] / log_med[last]);
    res.sum("step_ratio", cfg.dts[0] / cfg.dts[last]);
    res.col("dt", cfg.dts.clone());
    res.col("median_rel_error_linear", lin_med);
    res.col("median_abs_log_error_log", log_med);
    Ok(res)
}

// ---------------------------------------------------------------------------

/// Short-horizon mean capital: Monte Carlo against the expansion in `K/K̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderMeanConfig {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
    pub k_tilde: f64,
    pub rho: f64,
    pub delta_t: f64,
    /// Monte Carlo sub-steps per horizon.
    pub substeps: usize,
    pub run: RunSettings,
}

impl Default for SecondOrderMeanConfig {
    fn default() -> Self {
        SecondOrderMeanConfig {
            mu: 1.0,
            sigma: 0.2,
            k0: 1.0,
            k_tilde: 100.0,
            rho: 1.0,
            delta_t: 0.01,
            substeps: 100,
            run: RunSettings {
                n_paths: 100_000,
                ..RunSettings::default()
            },
        }
    }
}

pub fn second_order_mean(cfg: &SecondOrderMeanConfig) -> Result<ExperimentResult> {
    const NAME: &str = "second-order-mean";
    require_positive("delta_t", cfg.delta_t)?;
    let params = linear_params(cfg.mu, cfg.sigma, cfg.k0, cfg.k_tilde)?;
    let seed = derive_seed(cfg.run.seed, NAME);
    let dt = cfg.delta_t / cfg.substeps.max(1) as f64;
    let ens = EnsembleConfig::new(cfg.run.n_paths, seed, dt, cfg.substeps.max(1))
        .record_every(cfg.substeps.max(1))
        .scheme(StepScheme::Direct);
    let stats = ensemble_with(&params, &LeveragePolicy::Constant { rho: cfg.rho }, &ens)?;
    let analytic = mean_k_second_order(&params, cfg.rho, cfg.delta_t, cfg.k0)?;

    let mut res = ExperimentResult::new(NAME);
    res.meta("master_seed", cfg.run.seed);
    res.meta("derived_seed", seed);
    res.meta("dt", dt);
    res.meta("n_paths", cfg.run.n_paths);
    res.params_meta(&params);
    res.meta("rho", cfg.rho);
    res.meta("delta_t", cfg.delta_t);
    res.meta("substeps", cfg.substeps);
    let mc = stats.terminal_mean_k();
    let se = *stats.stderr_k.last().unwrap();
    res.sum("mc_mean_k", mc);
    res.sum("mc_stderr_k", se);
    res.sum("analytic_mean_k", analytic.value);
    res.sum("analytic_valid", if analytic.valid { 1.0 } else { 0.0 });
    res.sum("z", (mc - analytic.value) / se);
    res.col("t", stats.times);
    res.col("mean_k", stats.mean_k);
    res.col("stderr_k", stats.stderr_k);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small(n_paths: usize) -> RunSettings {
        RunSettings {
            n_paths,
            ..RunSettings::default()
        }
    }

    #[test]
    fn seeds_depend_on_name_and_master() {
        assert_ne!(derive_seed(42, "a"), derive_seed(42, "b"));
        assert_ne!(derive_seed(42, "a"), derive_seed(43, "a"));
        assert_eq!(derive_seed(7, "x"), derive_seed(7, "x"));
    }

    #[test]
    fn ols_recovers_a_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 * x - 1.0).collect();
        assert_relative_eq!(ols_slope(&x, &y), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn logreturn_without_noise_is_linear_in_rho() {
        let cfg = LogReturnConfig {
            sigma: 1e-300,
            lambdas: vec![0.0],
            rho_grid: vec![0.5, 1.0, 1.5],
            run: small(10),
            ..LogReturnConfig::default()
        };
        let res = logreturn_vs_rho(&cfg).unwrap();
        let col = res.column("mean_log_k_lambda_0").unwrap();
        for (rho, m) in cfg.rho_grid.iter().zip(col) {
            assert_relative_eq!(*m, rho * 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn experiments_are_reproducible() {
        let cfg = LogReturnConfig {
            lambdas: vec![0.0, 0.5],
            rho_grid: vec![1.0, 2.0],
            run: small(50),
            ..LogReturnConfig::default()
        };
        assert_eq!(logreturn_vs_rho(&cfg).unwrap(), logreturn_vs_rho(&cfg).unwrap());
    }

    #[test]
    fn zero_horizon_orders_coincide() {
        let cfg = ZerothFirstConfig {
            delta_t: 0.0,
            horizon: 0.5,
            run: small(20),
            ..ZerothFirstConfig::default()
        };
        let res = zeroth_vs_first_order(&cfg).unwrap();
        assert_eq!(res.column("mean_k_zeroth"), res.column("mean_k_first"));
        assert_eq!(res.summary_value("paired_diff_k"), Some(0.0));
    }

    #[test]
    fn return_functional_zero_crossings() {
        let res = return_functional_sweep(&ReturnFunctionalConfig::default()).unwrap();
        for g in 1..=5 {
            let z = res.summary_value(&format!("zero_crossing_gamma_{g}")).unwrap();
            assert_relative_eq!(z, 10.0, max_relative = 1e-2);
        }
        let z = res.summary_value("zero_crossing_log").unwrap();
        assert_relative_eq!(z, 10.0 * std::f64::consts::E, max_relative = 1e-3);
        let k = res.column("k").unwrap();
        let parabola = res.column("power_gamma_1").unwrap();
        for (k, y) in k.iter().zip(parabola) {
            assert_relative_eq!(*y, k * (1.0 - k / 10.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn rho_vs_k_limits() {
        let res = rho_vs_k_sweep(&RhoVsKConfig::default()).unwrap();
        for g in 1..=5 {
            let col = res.column(&format!("rho_power_gamma_{g}")).unwrap();
            assert!(col.windows(2).all(|w| w[1] < w[0]));
            assert!((col[0] / 25.0 - 1.0).abs() < 0.02, "gamma {g}: {}", col[0]);
            let tail = res
                .summary_value(&format!("k_rho_over_k_tilde_at_k_max_gamma_{g}"))
                .unwrap();
            assert!((tail - 1.0).abs() < 0.1, "gamma {g}: {tail}");
        }
        assert!(res.column("rho_log_alpha_1").unwrap().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kelly_vs_constant_reports_equilibria() {
        let cfg = KellyVsConstantConfig {
            horizon: 2.0,
            run: small(20),
            ..KellyVsConstantConfig::linear()
        };
        let res = kelly_vs_constant(&cfg).unwrap();
        assert_relative_eq!(res.summary_value("equilibrium_k_rho_1").unwrap(), 9.5, max_relative = 1e-12);
        let log = KellyVsConstantConfig {
            horizon: 2.0,
            run: small(20),
            ..KellyVsConstantConfig::logarithmic()
        };
        let res = kelly_vs_constant(&log).unwrap();
        assert_relative_eq!(
            res.summary_value("equilibrium_k_rho_1").unwrap(),
            (10f64.ln() + 0.95).exp(),
            max_relative = 1e-12
        );
        assert_eq!(res.name, "kelly-vs-constant-log");
    }

    #[test]
    fn linear_regime_needs_a_long_window() {
        let cfg = LinearRegimeConfig {
            horizon: 3.0,
            ..LinearRegimeConfig::default()
        };
        assert!(linear_regime(&cfg).is_err());
    }
}
