//! Brownian paths, Euler–Maruyama integration of the capital SDE and
//! Monte Carlo ensembles.
//!
//! Every path draws from its own ChaCha stream selected by
//! `(master_seed, path_index)`, so a path is reproducible on its own and
//! ensembles give bit-identical statistics for any number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{drift_mu_hat, CapacitySpec, LeveragePolicy, ModelParams};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_N_PATHS: usize = 2000;

const CHUNK: usize = 256;

/// Gaussian increment source for one path.
struct IncrementStream {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl IncrementStream {
    fn new(master_seed: u64, path_index: u64, dt: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(path_index);
        IncrementStream {
            rng,
            sqrt_dt: dt.sqrt(),
        }
    }

    fn next(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * self.sqrt_dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub dt: f64,
    /// `ΔW_i ~ N(0, dt)` for `i = 0..n_steps`.
    pub increments: Vec<f64>,
    pub master_seed: u64,
    pub path_index: u64,
}

impl BrownianPath {
    pub fn generate(master_seed: u64, path_index: u64, dt: f64, n_steps: usize) -> Result<Self> {
        check_grid(dt, n_steps)?;
        let mut stream = IncrementStream::new(master_seed, path_index, dt);
        let increments = (0..n_steps).map(|_| stream.next()).collect();
        Ok(BrownianPath {
            dt,
            increments,
            master_seed,
            path_index,
        })
    }

    pub fn from_increments(
        dt: f64,
        increments: Vec<f64>,
        master_seed: u64,
        path_index: u64,
    ) -> Result<Self> {
        check_grid(dt, increments.len())?;
        Ok(BrownianPath {
            dt,
            increments,
            master_seed,
            path_index,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    /// `W` at every grid point, starting from `W_0 = 0`.
    pub fn values(&self) -> Vec<f64> {
        let mut w = 0.0;
        std::iter::once(0.0)
            .chain(self.increments.iter().map(|dw| {
                w += dw;
                w
            }))
            .collect()
    }

    /// Same Brownian motion sampled on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps() % factor != 0 {
            return Err(Error::InvalidParameter {
                name: "factor",
                value: factor as f64,
                reason: "must divide the number of steps",
            });
        }
        let increments = self
            .increments
            .chunks(factor)
            .map(|c| c.iter().sum())
            .collect();
        Ok(BrownianPath {
            dt: self.dt * factor as f64,
            increments,
            master_seed: self.master_seed,
            path_index: self.path_index,
        })
    }
}

fn check_grid(dt: f64, n_steps: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "time step must be positive",
        });
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            value: 0.0,
            reason: "need at least one step",
        });
    }
    Ok(())
}

/// How the state is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepScheme {
    /// Log-space for logarithmic capacity, direct Euler in `K` otherwise.
    #[default]
    Auto,
    /// `K_{i+1} = K_i + ρμ̂K dt + ρσK ΔW`; fails if `K` leaves `(0, ∞)`.
    Direct,
    /// Euler on `y = log K` with the Itô-corrected drift `ρμ̂ - ρ²σ²/2`.
    LogSpace,
}

impl StepScheme {
    fn resolve(self, capacity: &CapacitySpec) -> StepScheme {
        match (self, capacity) {
            (StepScheme::Auto, CapacitySpec::Logarithmic { .. }) => StepScheme::LogSpace,
            (StepScheme::Auto, _) => StepScheme::Direct,
            (s, _) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub k_values: Vec<f64>,
    pub rho_values: Vec<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> f64 {
        *self.k_values.last().expect("trajectory is never empty")
    }
}

/// One integration step from `k` at time `t`; returns `(k_next, rho)`.
#[inline]
fn step(
    params: &ModelParams,
    policy: &LeveragePolicy,
    scheme: StepScheme,
    t: f64,
    k: f64,
    dt: f64,
    dw: f64,
) -> Result<(f64, f64)> {
    let rho = policy.rho(params, t, k)?;
    if rho == 0.0 {
        return Ok((k, rho));
    }
    let mu_hat = drift_mu_hat(params, rho * k)?;
    let vol = rho * params.sigma;
    let next = match scheme {
        StepScheme::LogSpace => {
            let y = k.ln() + (rho * mu_hat - 0.5 * vol * vol) * dt + vol * dw;
            y.exp()
        }
        _ => k + rho * mu_hat * k * dt + vol * k * dw,
    };
    Ok((next, rho))
}

pub fn simulate(
    params: &ModelParams,
    policy: &LeveragePolicy,
    path: &BrownianPath,
) -> Result<Trajectory> {
    simulate_with(params, policy, path, StepScheme::Auto)
}

pub fn simulate_with(
    params: &ModelParams,
    policy: &LeveragePolicy,
    path: &BrownianPath,
    scheme: StepScheme,
) -> Result<Trajectory> {
    params.validate()?;
    let scheme = scheme.resolve(&params.capacity);
    let n = path.n_steps();
    let mut times = Vec::with_capacity(n + 1);
    let mut k_values = Vec::with_capacity(n + 1);
    let mut rho_values = Vec::with_capacity(n + 1);
    let mut k = params.k0;
    for (i, &dw) in path.increments.iter().enumerate() {
        let t = i as f64 * path.dt;
        let (next, rho) = step(params, policy, scheme, t, k, path.dt, dw)?;
        times.push(t);
        k_values.push(k);
        rho_values.push(rho);
        if !(next > 0.0 && next.is_finite()) {
            return Err(Error::PositivityViolation { step: i + 1, k: next });
        }
        k = next;
    }
    let t = n as f64 * path.dt;
    times.push(t);
    k_values.push(k);
    rho_values.push(policy.rho(params, t, k)?);
    Ok(Trajectory {
        times,
        k_values,
        rho_values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub master_seed: u64,
    pub dt: f64,
    pub n_steps: usize,
    pub scheme: StepScheme,
    /// Statistics are kept at every `record_every`-th grid point (and always
    /// at the final one).
    pub record_every: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, master_seed: u64, dt: f64, n_steps: usize) -> Self {
        EnsembleConfig {
            n_paths,
            master_seed,
            dt,
            n_steps,
            scheme: StepScheme::Auto,
            record_every: 1,
            workers: None,
        }
    }

    pub fn for_horizon(n_paths: usize, master_seed: u64, dt: f64, horizon: f64) -> Self {
        Self::new(n_paths, master_seed, dt, (horizon / dt).round() as usize)
    }

    pub fn scheme(mut self, scheme: StepScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn record_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = (0..=self.n_steps).step_by(self.record_every).collect();
        if *steps.last().unwrap() != self.n_steps {
            steps.push(self.n_steps);
        }
        steps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathFailure {
    pub path_index: u64,
    pub error: Error,
}

/// Cross-path statistics at each recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_k: Vec<f64>,
    pub mean_log_k: Vec<f64>,
    pub stderr_k: Vec<f64>,
    pub stderr_log_k: Vec<f64>,
    /// Paths that completed and enter the statistics.
    pub n_paths: usize,
    /// Terminal capital per path index; `None` where the path failed.
    pub terminal_k: Vec<Option<f64>>,
    pub failures: Vec<PathFailure>,
}

impl EnsembleStats {
    pub fn terminal_mean_k(&self) -> f64 {
        *self.mean_k.last().unwrap()
    }

    pub fn terminal_mean_log_k(&self) -> f64 {
        *self.mean_log_k.last().unwrap()
    }
}

/// Ensemble with the default scheme, recording every step.
pub fn ensemble(
    params: &ModelParams,
    policy: &LeveragePolicy,
    n_paths: usize,
    master_seed: u64,
    dt: f64,
    n_steps: usize,
) -> Result<EnsembleStats> {
    ensemble_with(
        params,
        policy,
        &EnsembleConfig::new(n_paths, master_seed, dt, n_steps),
    )
}

fn run_path(
    params: &ModelParams,
    policy: &LeveragePolicy,
    config: &EnsembleConfig,
    scheme: StepScheme,
    path_index: u64,
) -> Result<Vec<f64>> {
    let mut stream = IncrementStream::new(config.master_seed, path_index, config.dt);
    let mut recorded = Vec::with_capacity(config.n_steps / config.record_every + 2);
    let mut k = params.k0;
    recorded.push(k);
    for i in 0..config.n_steps {
        let t = i as f64 * config.dt;
        let (next, _) = step(params, policy, scheme, t, k, config.dt, stream.next())?;
        if !(next > 0.0 && next.is_finite()) {
            return Err(Error::PositivityViolation { step: i + 1, k: next });
        }
        k = next;
        if (i + 1) % config.record_every == 0 || i + 1 == config.n_steps {
            recorded.push(k);
        }
    }
    Ok(recorded)
}

pub fn ensemble_with(
    params: &ModelParams,
    policy: &LeveragePolicy,
    config: &EnsembleConfig,
) -> Result<EnsembleStats> {
    params.validate()?;
    check_grid(config.dt, config.n_steps)?;
    if config.n_paths < 2 {
        return Err(Error::InvalidParameter {
            name: "n_paths",
            value: config.n_paths as f64,
            reason: "need at least two paths",
        });
    }
    let scheme = config.scheme.resolve(&params.capacity);
    let record_steps = config.record_steps();
    let n_rec = record_steps.len();

    let pool = match config.workers {
        Some(w) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .expect("thread pool construction"),
        ),
        None => None,
    };

    // Welford accumulators, fed strictly in path-index order.
    let mut count = 0usize;
    let mut mean_k = vec![0.0; n_rec];
    let mut m2_k = vec![0.0; n_rec];
    let mut mean_lk = vec![0.0; n_rec];
    let mut m2_lk = vec![0.0; n_rec];
    let mut terminal_k = Vec::with_capacity(config.n_paths);
    let mut failures = Vec::new();

    for start in (0..config.n_paths).step_by(CHUNK) {
        let end = (start + CHUNK).min(config.n_paths);
        let work = || -> Vec<Result<Vec<f64>>> {
            (start..end)
                .into_par_iter()
                .map(|i| run_path(params, policy, config, scheme, i as u64))
                .collect()
        };
        let results = match &pool {
            Some(p) => p.install(work),
            None => work(),
        };
        for (offset, result) in results.into_iter().enumerate() {
            let path_index = (start + offset) as u64;
            match result {
                Ok(ks) => {
                    count += 1;
                    let n = count as f64;
                    for (j, &k) in ks.iter().enumerate() {
                        let d = k - mean_k[j];
                        mean_k[j] += d / n;
                        m2_k[j] += d * (k - mean_k[j]);
                        let lk = k.ln();
                        let d = lk - mean_lk[j];
                        mean_lk[j] += d / n;
                        m2_lk[j] += d * (lk - mean_lk[j]);
                    }
                    terminal_k.push(ks.last().copied());
                }
                Err(error) => {
                    terminal_k.push(None);
                    failures.push(PathFailure { path_index, error });
                }
            }
        }
    }

    if failures.len() * 100 > config.n_paths || count < 2 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total: config.n_paths,
        });
    }

    let n = count as f64;
    let stderr = |m2: &[f64]| -> Vec<f64> {
        m2.iter()
            .map(|&m| (m.max(0.0) / (n - 1.0)).sqrt() / n.sqrt())
            .collect()
    };
    Ok(EnsembleStats {
        times: record_steps.iter().map(|&s| s as f64 * config.dt).collect(),
        stderr_k: stderr(&m2_k),
        stderr_log_k: stderr(&m2_lk),
        mean_k,
        mean_log_k: mean_lk,
        n_paths: count,
        terminal_k,
        failures,
    })
}

/// Applies `f` to every simulated trajectory of the ensemble described by
/// `config` (its `record_every` is ignored). Paths use the same streams as
/// [`ensemble_with`], results come back in path order, and failed paths give
/// `None`, with the same 1% tolerance.
pub fn map_paths<F>(
    params: &ModelParams,
    policy: &LeveragePolicy,
    config: &EnsembleConfig,
    f: F,
) -> Result<Vec<Option<f64>>>
where
    F: Fn(&Trajectory) -> f64 + Sync,
{
    params.validate()?;
    check_grid(config.dt, config.n_steps)?;
    let work = || -> Vec<Option<f64>> {
        (0..config.n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let path = BrownianPath::generate(config.master_seed, i, config.dt, config.n_steps).ok()?;
                simulate_with(params, policy, &path, config.scheme).ok().map(|t| f(&t))
            })
            .collect()
    };
    let out = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool construction")
            .install(work),
        None => work(),
    };
    let failed = out.iter().filter(|x| x.is_none()).count();
    if failed * 100 > config.n_paths {
        return Err(Error::TooManyFailures {
            failed,
            total: config.n_paths,
        });
    }
    Ok(out)
}

/// Mean and standard error of `a_i - b_i` over paths where both finished.
pub fn paired_difference(a: &[Option<f64>], b: &[Option<f64>], map: impl Fn(f64) -> f64) -> (f64, f64) {
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(map((*x)?) - map((*y)?)))
        .collect();
    mean_and_stderr(&diffs)
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gbm(mu: f64, sigma: f64) -> ModelParams {
        ModelParams::gbm(mu, sigma).unwrap()
    }

    #[test]
    fn path_is_deterministic_and_streams_differ() {
        let a = BrownianPath::generate(42, 0, 0.01, 1000).unwrap();
        let b = BrownianPath::generate(42, 0, 0.01, 1000).unwrap();
        let c = BrownianPath::generate(42, 1, 0.01, 1000).unwrap();
        assert_eq!(a.increments, b.increments);
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn increment_mean_within_clt_bound() {
        let dt = 0.01;
        let n = 1_000_000;
        let path = BrownianPath::generate(5, 0, dt, n).unwrap();
        let mean = path.increments.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 * (dt / n as f64).sqrt());
        let var = path.increments.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / dt - 1.0).abs() < 0.01);
    }

    #[test]
    fn grid_preconditions() {
        assert!(BrownianPath::generate(1, 0, 0.0, 10).is_err());
        assert!(BrownianPath::generate(1, 0, 0.1, 0).is_err());
    }

    #[test]
    fn coarsen_preserves_endpoint() {
        let path = BrownianPath::generate(9, 3, 0.001, 1000).unwrap();
        let coarse = path.coarsen(4 * 5).unwrap();
        assert_eq!(coarse.n_steps(), 50);
        assert_relative_eq!(coarse.dt, 0.02, epsilon = 1e-15);
        assert_relative_eq!(
            *coarse.values().last().unwrap(),
            *path.values().last().unwrap(),
            epsilon = 1e-12
        );
        assert!(path.coarsen(7).is_err());
    }

    #[test]
    fn deterministic_growth_without_noise() {
        let params = ModelParams::new(1.0, 1e-300, 1.0, 1.0, CapacitySpec::None).unwrap();
        let path = BrownianPath::from_increments(1e-3, vec![0.0; 1000], 0, 0).unwrap();
        let traj = simulate(&params, &LeveragePolicy::Constant { rho: 1.0 }, &path).unwrap();
        assert_eq!(traj.k_values[0], 1.0);
        assert_eq!(traj.times.len(), traj.k_values.len());
        assert_eq!(traj.rho_values.len(), traj.k_values.len());
        // Euler: (1 + dt)^n = e - e dt / 2 + O(dt²)
        assert!((traj.terminal() - std::f64::consts::E).abs() < 2e-3);
    }

    #[test]
    fn capacity_is_a_fixed_point_without_noise() {
        let params =
            ModelParams::new(0.5, 1e-300, 10.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 }).unwrap();
        let path = BrownianPath::from_increments(0.01, vec![0.0; 500], 0, 0).unwrap();
        let traj = simulate(&params, &LeveragePolicy::Constant { rho: 1.0 }, &path).unwrap();
        assert!(traj.k_values.iter().all(|&k| k == 10.0));
    }

    #[test]
    fn gbm_euler_tracks_exact_solution() {
        let (mu, sigma, rho) = (0.4, 0.3, 1.5);
        let params = gbm(mu, sigma);
        let path = BrownianPath::generate(17, 0, 1e-4, 10_000).unwrap();
        let traj = simulate(&params, &LeveragePolicy::Constant { rho }, &path).unwrap();
        let w = path.values();
        let max_rel = traj
            .times
            .iter()
            .zip(&traj.k_values)
            .zip(&w)
            .map(|((t, k), w)| {
                let exact = ((rho * mu - 0.5 * rho * rho * sigma * sigma) * t + rho * sigma * w).exp();
                ((k - exact) / exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_rel < 0.02, "max relative error {max_rel}");
    }

    #[test]
    fn log_space_gbm_is_exact() {
        let (mu, sigma, rho) = (0.4, 0.3, 1.5);
        let path = BrownianPath::generate(17, 0, 0.05, 40).unwrap();
        let traj = simulate_with(
            &gbm(mu, sigma),
            &LeveragePolicy::Constant { rho },
            &path,
            StepScheme::LogSpace,
        )
        .unwrap();
        let w = *path.values().last().unwrap();
        let exact = ((rho * mu - 0.5 * rho * rho * sigma * sigma) * 2.0 + rho * sigma * w).exp();
        assert_relative_eq!(traj.terminal(), exact, max_relative = 1e-12);
    }

    #[test]
    fn strong_error_decreases_with_dt() {
        let (mu, sigma, rho) = (1.0, 0.5, 1.0);
        let params = gbm(mu, sigma);
        let mut errors = Vec::new();
        for factor in [4usize, 2, 1] {
            let mut max_err: f64 = 0.0;
            for index in 0..50 {
                let fine = BrownianPath::generate(99, index, 0.0025, 400).unwrap();
                let path = fine.coarsen(factor).unwrap();
                let traj = simulate(&params, &LeveragePolicy::Constant { rho }, &path).unwrap();
                let w = path.values();
                for ((t, k), w) in traj.times.iter().zip(&traj.k_values).zip(&w) {
                    let exact = ((mu - 0.5 * sigma * sigma) * t + sigma * w).exp();
                    max_err = max_err.max((k - exact).abs());
                }
            }
            errors.push(max_err);
        }
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    #[test]
    fn map_paths_sees_the_ensemble_streams() {
        let params = ModelParams::new(0.3, 0.4, 1.0, 5.0, CapacitySpec::PowerLaw { gamma: 1.0 }).unwrap();
        let policy = LeveragePolicy::Constant { rho: 0.9 };
        let cfg = EnsembleConfig::new(300, 5, 0.01, 150);
        let stats = ensemble_with(&params, &policy, &cfg).unwrap();
        let mapped = map_paths(&params, &policy, &cfg.clone().workers(3), |t| t.terminal()).unwrap();
        assert_eq!(mapped, stats.terminal_k);
    }

    #[test]
    fn positivity_violation_is_reported() {
        let params = gbm(0.0, 1.0);
        let path = BrownianPath::from_increments(0.01, vec![0.0, -2.0, 0.0], 0, 0).unwrap();
        let err = simulate(&params, &LeveragePolicy::Constant { rho: 1.0 }, &path).unwrap_err();
        assert!(matches!(err, Error::PositivityViolation { step: 2, .. }));
        // Log-space stepping cannot leave (0, ∞).
        assert!(simulate_with(&params, &LeveragePolicy::Constant { rho: 1.0 }, &path, StepScheme::LogSpace).is_ok());
    }

    #[test]
    fn ensemble_without_noise_has_zero_stderr() {
        let params =
            ModelParams::new(1.0, 1e-12, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 }).unwrap();
        let stats = ensemble(&params, &LeveragePolicy::Constant { rho: 1.0 }, 16, 1, 0.01, 100).unwrap();
        assert!(stats.stderr_k.iter().all(|&s| s < 1e-10));
        assert_eq!(stats.times.len(), 101);
        assert_eq!(stats.n_paths, 16);
    }

    #[test]
    fn ensemble_is_independent_of_worker_count() {
        let params =
            ModelParams::new(1.0, 0.3, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 }).unwrap();
        let policy = LeveragePolicy::StationaryLinear;
        let base = EnsembleConfig::new(600, 7, 0.01, 150).record_every(10);
        let one = ensemble_with(&params, &policy, &base.clone().workers(1)).unwrap();
        let eight = ensemble_with(&params, &policy, &base.workers(8)).unwrap();
        assert_eq!(one, eight);
    }

    #[test]
    fn ensemble_records_at_stride_and_final_step() {
        let params = gbm(0.1, 0.2);
        let cfg = EnsembleConfig::new(4, 1, 0.1, 25).record_every(10);
        let stats = ensemble_with(&params, &LeveragePolicy::Thorp, &cfg).unwrap();
        let expected = [0.0, 1.0, 2.0, 2.5];
        for (t, e) in stats.times.iter().zip(expected) {
            assert_relative_eq!(*t, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn ensemble_rejects_too_many_failures() {
        // ρσ√dt = 2: most paths go negative in a single step.
        let params = gbm(0.0, 1.0);
        let err = ensemble(&params, &LeveragePolicy::Constant { rho: 2.0 }, 100, 3, 1.0, 5).unwrap_err();
        assert!(matches!(err, Error::TooManyFailures { .. }));
        assert!(ensemble(&params, &LeveragePolicy::Constant { rho: 2.0 }, 1, 3, 1.0, 5).is_err());
    }

    #[test]
    fn gbm_log_slope_matches_ito_drift() {
        let (mu, sigma, rho) = (0.5, 0.4, 1.2);
        let horizon = 2.0;
        // log-space stepping has no discretisation bias for constant ρ
        let cfg = EnsembleConfig::for_horizon(4000, 11, 0.01, horizon)
            .record_every(200)
            .scheme(StepScheme::LogSpace);
        let stats = ensemble_with(&gbm(mu, sigma), &LeveragePolicy::Constant { rho }, &cfg).unwrap();
        let slope = stats.terminal_mean_log_k() / horizon;
        let se = stats.stderr_log_k.last().unwrap() / horizon;
        let expected = rho * mu - 0.5 * rho * rho * sigma * sigma;
        assert!((slope - expected).abs() < 3.0 * se, "{slope} vs {expected} ± {se}");
    }
}
