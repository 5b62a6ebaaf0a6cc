//! Exact pathwise solutions, analytic expectations and stochastic equilibria.
//!
//! All pathwise solutions are evaluated on the grid of the supplied
//! [`BrownianPath`] so they can be compared step for step with the
//! Euler–Maruyama engine driven by the same increments.

use crate::error::{Error, Result};
use crate::model::{drift_mu_hat, CapacitySpec, ModelParams};
use crate::numerics::{cumulative_exponential_integral, find_root, IntegralFlavor, RootBracket};
use crate::sde_engine::{BrownianPath, Trajectory};

/// Coefficients of `dz = (a z + c) dt + (b z + d) dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSdeCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LinearSdeCoeffs {
    /// `z_t = Φ_t (z₀ + (c - bd) ∫Φ_s⁻¹ ds + d ∫Φ_s⁻¹ dW_s)` with
    /// `Φ_t = exp((a - b²/2) t + b W_t)`, at every grid point of `path`.
    ///
    /// With `b = 0` the time integral is done analytically; otherwise by the
    /// trapezoid rule on the path grid. The stochastic integral is always the
    /// left-point Itô sum.
    pub fn solve_on_path(&self, z0: f64, path: &BrownianPath) -> Result<Vec<f64>> {
        let LinearSdeCoeffs { a, b, c, d } = *self;
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("z0", z0)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        let drift = a - 0.5 * b * b;
        let n = path.n_steps();
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * path.dt).collect();
        let w = path.values();

        let time_integral = if b == 0.0 {
            times
                .iter()
                .map(|&t| if drift == 0.0 { t } else { -(-drift * t).exp_m1() / drift })
                .collect()
        } else {
            cumulative_exponential_integral(-drift, -b, path, IntegralFlavor::Time)?
        };
        let ito_integral = if d == 0.0 {
            vec![0.0; n + 1]
        } else {
            cumulative_exponential_integral(-drift, -b, path, IntegralFlavor::Ito)?
        };

        let out: Vec<f64> = (0..=n)
            .map(|i| {
                let phi = (drift * times[i] + b * w[i]).exp();
                phi * (z0 + (c - b * d) * time_integral[i] + d * ito_integral[i])
            })
            .collect();
        if out.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("linear SDE solution"));
        }
        Ok(out)
    }
}

fn require_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "leverage must be positive",
        })
    }
}

fn trajectory(path: &BrownianPath, k_values: Vec<f64>, rho: f64) -> Result<Trajectory> {
    if k_values.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::NonFinite("exact solution"));
    }
    let n = k_values.len();
    Ok(Trajectory {
        times: (0..n).map(|i| i as f64 * path.dt).collect(),
        k_values,
        rho_values: vec![rho; n],
    })
}

/// Exact solution for `f(x) = x^γ` at constant leverage, through the linear
/// SDE satisfied by `y = (ρK/K̃)^{-γ}`.
pub fn exact_power_path(params: &ModelParams, rho: f64, path: &BrownianPath) -> Result<Trajectory> {
    params.validate()?;
    require_rho(rho)?;
    let gamma = match params.capacity {
        CapacitySpec::PowerLaw { gamma } => gamma,
        ref other => {
            return Err(Error::UnsupportedCapacity {
                operation: "exact_power_path",
                capacity: other.name(),
            })
        }
    };
    let mu = rho * params.mu;
    let sigma = rho * params.sigma;
    let scale = params.k_tilde / rho;
    let coeffs = LinearSdeCoeffs {
        a: -gamma * mu + 0.5 * gamma * (gamma + 1.0) * sigma * sigma,
        b: -gamma * sigma,
        c: gamma * mu,
        d: 0.0,
    };
    let y0 = (params.k0 / scale).powf(-gamma);
    let y = coeffs.solve_on_path(y0, path)?;
    let k = y.iter().map(|y| scale * y.powf(-1.0 / gamma)).collect();
    trajectory(path, k, rho)
}

/// Exact solution for the linear capacity,
/// `K = E_t / (1/K₀ + (ρ²μ/K̃) ∫₀ᵗ E_s ds)` with
/// `E_t = exp((ρμ - ρ²σ²/2) t + ρσ W_t)`.
///
/// [`CapacitySpec::None`] is accepted and gives geometric Brownian motion.
pub fn exact_linear_path(params: &ModelParams, rho: f64, path: &BrownianPath) -> Result<Trajectory> {
    params.validate()?;
    require_rho(rho)?;
    let inv_k_tilde = match params.capacity {
        CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => 1.0 / params.k_tilde,
        CapacitySpec::None => 0.0,
        ref other => {
            return Err(Error::UnsupportedCapacity {
                operation: "exact_linear_path",
                capacity: other.name(),
            })
        }
    };
    let drift = rho * params.mu - 0.5 * (rho * params.sigma).powi(2);
    let vol = rho * params.sigma;
    let integral = cumulative_exponential_integral(drift, vol, path, IntegralFlavor::Time)?;
    let w = path.values();
    let k = (0..=path.n_steps())
        .map(|i| {
            let e = (drift * i as f64 * path.dt + vol * w[i]).exp();
            e / (1.0 / params.k0 + rho * rho * params.mu * inv_k_tilde * integral[i])
        })
        .collect();
    trajectory(path, k, rho)
}

fn log_alpha(params: &ModelParams, operation: &'static str) -> Result<f64> {
    params.validate()?;
    match params.capacity {
        CapacitySpec::Logarithmic { alpha } => Ok(alpha),
        ref other => Err(Error::UnsupportedCapacity {
            operation,
            capacity: other.name(),
        }),
    }
}

/// Exact Gompertz-type solution at unit leverage:
/// `log K` follows `dy = (c - αμ y) dt + σ dW` with
/// `c = μ(1 + α log K̃) - σ²/2`.
pub fn exact_log_path(params: &ModelParams, path: &BrownianPath) -> Result<Trajectory> {
    let alpha = log_alpha(params, "exact_log_path")?;
    if params.mu == 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: 0.0,
            reason: "drift must be non-zero",
        });
    }
    let coeffs = LinearSdeCoeffs {
        a: -alpha * params.mu,
        b: 0.0,
        c: params.mu * (1.0 + alpha * params.k_tilde.ln()) - 0.5 * params.sigma * params.sigma,
        d: params.sigma,
    };
    let y = coeffs.solve_on_path(params.k0.ln(), path)?;
    trajectory(path, y.iter().map(|y| y.exp()).collect(), 1.0)
}

/// `⟨log K(t)⟩` under logarithmic capacity at unit leverage. `t = ∞` gives
/// the asymptote.
pub fn expected_log_k_log(params: &ModelParams, t: f64) -> Result<f64> {
    let alpha = log_alpha(params, "expected_log_k_log")?;
    if !(params.mu > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: if t >= 0.0 { "mu" } else { "t" },
            value: if t >= 0.0 { params.mu } else { t },
            reason: "need μ > 0 and t ≥ 0",
        });
    }
    let limit = 1.0 / alpha + params.k_tilde.ln()
        - params.sigma * params.sigma / (2.0 * alpha * params.mu);
    let decay = (-alpha * params.mu * t).exp();
    Ok(params.k0.ln() * decay + limit * (1.0 - decay))
}

/// Outcome of an equilibrium calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equilibrium {
    Positive(f64),
    /// Expected log growth is non-positive at every `K > 0`; the formula
    /// value is kept for reference.
    NonPositive(f64),
}

impl Equilibrium {
    pub fn value(&self) -> f64 {
        match *self {
            Equilibrium::Positive(v) | Equilibrium::NonPositive(v) => v,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Equilibrium::Positive(_))
    }
}

fn classify(value: f64) -> Equilibrium {
    if value > 0.0 {
        Equilibrium::Positive(value)
    } else {
        Equilibrium::NonPositive(value)
    }
}

fn require_positive_mu(params: &ModelParams) -> Result<()> {
    if params.mu > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "mu",
            value: params.mu,
            reason: "equilibrium needs a positive drift",
        })
    }
}

/// `K∞ = K̃ (1/ρ - σ²/2μ)` for the linear capacity.
pub fn equilibrium_linear(params: &ModelParams, rho: f64) -> Result<Equilibrium> {
    params.validate()?;
    require_rho(rho)?;
    require_positive_mu(params)?;
    match params.capacity {
        CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => Ok(classify(
            params.k_tilde * (1.0 / rho - params.sigma * params.sigma / (2.0 * params.mu)),
        )),
        ref other => Err(Error::UnsupportedCapacity {
            operation: "equilibrium_linear",
            capacity: other.name(),
        }),
    }
}

/// `K∞ = (K̃/ρ)(1 - ρσ²/2μ)^{1/γ}`; zero or an extinction indicator when the
/// base is non-positive.
pub fn equilibrium_power(params: &ModelParams, rho: f64) -> Result<Equilibrium> {
    params.validate()?;
    require_rho(rho)?;
    require_positive_mu(params)?;
    match params.capacity {
        CapacitySpec::PowerLaw { gamma } => {
            let base = 1.0 - rho * params.sigma * params.sigma / (2.0 * params.mu);
            if base <= 0.0 {
                Ok(Equilibrium::NonPositive(0.0))
            } else {
                Ok(Equilibrium::Positive(params.k_tilde / rho * base.powf(1.0 / gamma)))
            }
        }
        ref other => Err(Error::UnsupportedCapacity {
            operation: "equilibrium_power",
            capacity: other.name(),
        }),
    }
}

/// Equilibrium `log K∞ = log K̃ + (1/α)(1 - σ²/2μ)` at unit leverage.
pub fn equilibrium_log(params: &ModelParams) -> Result<f64> {
    let alpha = log_alpha(params, "equilibrium_log")?;
    require_positive_mu(params)?;
    Ok(params.k_tilde.ln() + (1.0 - params.sigma * params.sigma / (2.0 * params.mu)) / alpha)
}

/// `log K∞ = log(K̃/ρ) + (1 - ρσ²/2μ)/α` at constant leverage `ρ`.
pub fn equilibrium_log_at(params: &ModelParams, rho: f64) -> Result<f64> {
    let alpha = log_alpha(params, "equilibrium_log_at")?;
    require_rho(rho)?;
    require_positive_mu(params)?;
    Ok((params.k_tilde / rho).ln()
        + (1.0 - rho * params.sigma * params.sigma / (2.0 * params.mu)) / alpha)
}

/// Expected log growth rate `ρμ̂(ρK) - ρ²σ²/2` at capital `k`.
pub fn log_growth_rate(params: &ModelParams, rho: f64, k: f64) -> Result<f64> {
    Ok(rho * drift_mu_hat(params, rho * k)? - 0.5 * (rho * params.sigma).powi(2))
}

/// Equilibrium found by solving `log_growth_rate = 0` in `log K`, for any
/// capacity whose drift decreases in `K`.
pub fn stochastic_equilibrium(params: &ModelParams, rho: f64) -> Result<Equilibrium> {
    params.validate()?;
    require_rho(rho)?;
    if params.capacity == CapacitySpec::None {
        return Err(Error::UnsupportedCapacity {
            operation: "stochastic_equilibrium",
            capacity: "none",
        });
    }
    let g = |u: f64| log_growth_rate(params, rho, u.exp()).unwrap_or(f64::NAN);
    let centre = (params.k_tilde / rho).ln();

    // Widen a bracket around K̃/ρ in log space until the sign changes.
    let mut lo = centre - 1.0;
    let mut hi = centre + 1.0;
    let mut width = 1.0;
    while g(lo) <= 0.0 {
        width *= 2.0;
        lo = centre - width;
        if width > 700.0 {
            return Ok(Equilibrium::NonPositive(0.0));
        }
    }
    width = 1.0;
    while g(hi) > 0.0 {
        width *= 2.0;
        hi = centre + width;
        if width > 700.0 {
            return Err(Error::NoSignChange {
                lo,
                hi,
                f_lo: g(lo),
                f_hi: g(hi),
            });
        }
    }
    let u = find_root(g, RootBracket::new(lo, hi).with_tol(1e-14))?;
    Ok(Equilibrium::Positive(u.exp()))
}

/// Mean capital after a short horizon, to first order in `K/K̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderMean {
    pub value: f64,
    /// `false` when `k_t e^{ρμδt}` is not small against `K̃`.
    pub valid: bool,
}

/// Ratio above which `k_t e^{ρμδt} / K̃` is no longer considered small.
pub const SMALL_RATIO: f64 = 0.1;

/// `⟨K(t+δt)⟩ ≈ k_t [(1 + q) e^{ρμδt} - q e^{(2ρμ + ρ²σ²)δt}]` with
/// `q = ρ (k_t/K̃) μ / (μ + ρσ²)`, for the linear capacity.
pub fn mean_k_second_order(
    params: &ModelParams,
    rho: f64,
    delta_t: f64,
    k_t: f64,
) -> Result<SecondOrderMean> {
    params.validate()?;
    require_rho(rho)?;
    let inv_k_tilde = match params.capacity {
        CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => 1.0 / params.k_tilde,
        CapacitySpec::None => 0.0,
        ref other => {
            return Err(Error::UnsupportedCapacity {
                operation: "mean_k_second_order",
                capacity: other.name(),
            })
        }
    };
    if !(delta_t >= 0.0) || !(k_t > 0.0) {
        return Err(Error::InvalidParameter {
            name: if delta_t >= 0.0 { "k_t" } else { "delta_t" },
            value: if delta_t >= 0.0 { k_t } else { delta_t },
            reason: "need δt ≥ 0 and k_t > 0",
        });
    }
    let (mu, s2) = (params.mu, params.sigma * params.sigma);
    let q = rho * k_t * inv_k_tilde * mu / (mu + rho * s2);
    let growth = (rho * mu * delta_t).exp();
    let value = k_t * ((1.0 + q) * growth - q * ((2.0 * rho * mu + rho * rho * s2) * delta_t).exp());
    Ok(SecondOrderMean {
        value,
        valid: k_t * growth * inv_k_tilde < SMALL_RATIO,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear(mu: f64, sigma: f64, k0: f64, k_tilde: f64) -> ModelParams {
        ModelParams::new(mu, sigma, k0, k_tilde, CapacitySpec::PowerLaw { gamma: 1.0 }).unwrap()
    }

    fn log_params(alpha: f64, mu: f64, sigma: f64, k0: f64, k_tilde: f64) -> ModelParams {
        ModelParams::new(mu, sigma, k0, k_tilde, CapacitySpec::Logarithmic { alpha }).unwrap()
    }

    fn zero_path(dt: f64, n: usize) -> BrownianPath {
        BrownianPath::from_increments(dt, vec![0.0; n], 0, 0).unwrap()
    }

    #[test]
    fn linear_sde_with_constant_coefficients() {
        // dz = (a z + c) dt: z = (z0 + c/a) e^{at} - c/a, here -c/a = 4
        let coeffs = LinearSdeCoeffs {
            a: -0.5,
            b: 0.0,
            c: 2.0,
            d: 0.0,
        };
        let z = coeffs.solve_on_path(1.0, &zero_path(0.1, 30)).unwrap();
        let t: f64 = 3.0;
        assert_relative_eq!(z[30], (1.0 - 4.0) * (-0.5 * t).exp() + 4.0, max_relative = 1e-12);
    }

    #[test]
    fn linear_sde_gbm_case_matches_exponential() {
        let path = BrownianPath::generate(3, 1, 0.01, 100).unwrap();
        let coeffs = LinearSdeCoeffs {
            a: 0.3,
            b: 0.4,
            c: 0.0,
            d: 0.0,
        };
        let z = coeffs.solve_on_path(2.0, &path).unwrap();
        let w = path.values();
        assert_relative_eq!(z[100], 2.0 * ((0.3 - 0.08) * 1.0 + 0.4 * w[100]).exp(), max_relative = 1e-12);
    }

    #[test]
    fn exact_paths_start_at_k0() {
        let path = BrownianPath::generate(11, 0, 0.01, 50).unwrap();
        let p = linear(1.0, 0.2, 0.7, 10.0);
        assert_eq!(exact_linear_path(&p, 1.3, &path).unwrap().k_values[0], 0.7);
        assert_relative_eq!(exact_power_path(&p, 1.3, &path).unwrap().k_values[0], 0.7, max_relative = 1e-14);
        let lp = log_params(1.0, 0.1, 0.1, 0.7, 10.0);
        assert_relative_eq!(exact_log_path(&lp, &path).unwrap().k_values[0], 0.7, max_relative = 1e-14);
    }

    #[test]
    fn power_path_specialises_to_linear_path() {
        let path = BrownianPath::generate(5, 2, 0.01, 300).unwrap();
        let p = linear(1.0, 0.2, 1.0, 10.0);
        let a = exact_power_path(&p, 0.8, &path).unwrap();
        let b = exact_linear_path(&p, 0.8, &path).unwrap();
        for (x, y) in a.k_values.iter().zip(&b.k_values) {
            assert_relative_eq!(x, y, max_relative = 1e-3);
        }
    }

    #[test]
    fn logistic_limit_without_noise() {
        let p = linear(1.0, 1e-300, 0.5, 1.0);
        let path = zero_path(0.01, 3000);
        let traj = exact_linear_path(&p, 1.0, &path).unwrap();
        // logistic oracle K = 1 / (1 + (1/K₀ - 1) e^{-t})
        for (t, k) in traj.times.iter().zip(&traj.k_values).step_by(250) {
            let oracle = 1.0 / (1.0 + (-t).exp());
            assert_relative_eq!(*k, oracle, max_relative = 1e-5);
        }
        // trapezoid error on ∫e^s ds is dt²/12 relative
        assert_relative_eq!(traj.terminal(), 1.0, epsilon = 1e-4);
        let general = exact_power_path(&p, 1.0, &path).unwrap();
        assert_relative_eq!(general.terminal(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn power_path_without_noise_matches_ode() {
        // dK = μK(1 - (K/K̃)^γ) dt has K^{-γ} = K̃^{-γ} + (K₀^{-γ} - K̃^{-γ}) e^{-γμt}
        let p = ModelParams::new(0.8, 1e-300, 0.3, 2.0, CapacitySpec::PowerLaw { gamma: 2.5 }).unwrap();
        let traj = exact_power_path(&p, 1.0, &zero_path(0.01, 400)).unwrap();
        let t: f64 = 4.0;
        let y = 2f64.powf(-2.5) + (0.3f64.powf(-2.5) - 2f64.powf(-2.5)) * (-2.5 * 0.8 * t).exp();
        assert_relative_eq!(traj.terminal(), y.powf(-1.0 / 2.5), max_relative = 1e-4);
    }

    #[test]
    fn linear_path_without_capacity_is_gbm() {
        let path = BrownianPath::generate(8, 4, 0.01, 200).unwrap();
        let far = linear(0.5, 0.3, 1.0, 1e15);
        let gbm = ModelParams::gbm(0.5, 0.3).unwrap();
        let a = exact_linear_path(&far, 1.0, &path).unwrap();
        let b = exact_linear_path(&gbm, 1.0, &path).unwrap();
        let w = path.values()[200];
        let exact = ((0.5 - 0.045) * 2.0 + 0.3 * w).exp();
        assert_relative_eq!(a.terminal(), exact, max_relative = 1e-10);
        assert_relative_eq!(b.terminal(), exact, max_relative = 1e-14);
    }

    #[test]
    fn gompertz_fixed_point() {
        let p = log_params(1.0, 1.0, 1e-300, 1.0, 10.0);
        let traj = exact_log_path(&p, &zero_path(0.01, 4000)).unwrap();
        assert_relative_eq!(traj.terminal(), 10.0 * std::f64::consts::E, max_relative = 1e-12);
        assert_relative_eq!(traj.terminal(), 27.1828, epsilon = 1e-4);
    }

    #[test]
    fn log_path_zero_increments_keep_ito_correction() {
        let p = log_params(0.5, 0.4, 0.3, 2.0, 5.0);
        let traj = exact_log_path(&p, &zero_path(0.05, 40)).unwrap();
        let t: f64 = 2.0;
        let am = 0.5 * 0.4;
        let c = 0.4 * (1.0 + 0.5 * 5f64.ln()) - 0.045;
        let y = (-am * t).exp() * (2f64.ln() + c * ((am * t).exp() - 1.0) / am);
        assert_relative_eq!(traj.terminal().ln(), y, max_relative = 1e-12);
    }

    #[test]
    fn expected_log_examples() {
        let p = log_params(1.0, 0.1, 0.1, 1.0, 10.0);
        assert_eq!(expected_log_k_log(&p, 0.0).unwrap(), 0.0);
        let limit = 10f64.ln() + 0.95;
        assert_relative_eq!(expected_log_k_log(&p, f64::INFINITY).unwrap(), limit, max_relative = 1e-15);
        assert_relative_eq!(limit, 3.2526, epsilon = 1e-4);
        assert_relative_eq!(equilibrium_log(&p).unwrap(), limit, max_relative = 1e-15);
        assert_relative_eq!(expected_log_k_log(&p, 1e4).unwrap(), limit, max_relative = 1e-12);
        assert!(expected_log_k_log(&p, -1.0).is_err());
    }

    #[test]
    fn expected_log_matches_unexpanded_formula() {
        let p = log_params(0.7, 0.3, 0.25, 1.7, 20.0);
        let (c0, am) = (1.7f64.ln(), 0.7 * 0.3);
        for t in [0.1f64, 1.0, 5.0] {
            let direct = (-am * t).exp()
                * (c0 + ((1.0 / 0.7 + 20f64.ln()) - 0.0625 / (2.0 * am)) * ((am * t).exp() - 1.0));
            assert_relative_eq!(expected_log_k_log(&p, t).unwrap(), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn equilibrium_log_examples() {
        let p = log_params(1.0, 0.5, 1.0, 1.0, 7.0);
        assert_relative_eq!(equilibrium_log(&p).unwrap(), 7f64.ln(), max_relative = 1e-15);
        let strong = log_params(1e12, 0.1, 0.1, 1.0, 7.0);
        assert_relative_eq!(equilibrium_log(&strong).unwrap(), 7f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn equilibrium_linear_examples() {
        let p = linear(0.1, 0.1, 1.0, 10.0);
        assert_relative_eq!(equilibrium_linear(&p, 1.0).unwrap().value(), 9.5, max_relative = 1e-14);
        let quiet = linear(0.1, 1e-300, 1.0, 10.0);
        assert_eq!(equilibrium_linear(&quiet, 1.0).unwrap(), Equilibrium::Positive(10.0));
        let edge = equilibrium_linear(&p, 2.0 * 0.1 / 0.01).unwrap();
        assert!(!edge.is_positive());
        assert!(edge.value().abs() < 1e-14);
        assert!(!equilibrium_linear(&p, 30.0).unwrap().is_positive());
        assert!(equilibrium_linear(&log_params(1.0, 0.1, 0.1, 1.0, 10.0), 1.0).is_err());
    }

    #[test]
    fn equilibria_agree_with_root_finding() {
        let p = linear(0.1, 0.1, 1.0, 10.0);
        for &rho in &[0.3, 1.0, 5.0] {
            let closed = equilibrium_linear(&p, rho).unwrap().value();
            let root = stochastic_equilibrium(&p, rho).unwrap().value();
            assert_relative_eq!(closed, root, max_relative = 1e-10);
        }
        assert!(!stochastic_equilibrium(&p, 25.0).unwrap().is_positive());

        let pw = ModelParams::new(0.6, 0.4, 1.0, 3.0, CapacitySpec::PowerLaw { gamma: 2.0 }).unwrap();
        assert_relative_eq!(
            equilibrium_power(&pw, 1.5).unwrap().value(),
            stochastic_equilibrium(&pw, 1.5).unwrap().value(),
            max_relative = 1e-10
        );

        let lp = log_params(0.3, 0.1, 0.1, 1.0, 10.0);
        for &rho in &[0.5, 1.0, 2.0] {
            let root = stochastic_equilibrium(&lp, rho).unwrap().value().ln();
            assert_relative_eq!(root, equilibrium_log_at(&lp, rho).unwrap(), max_relative = 1e-10);
        }
        assert_relative_eq!(equilibrium_log_at(&lp, 1.0).unwrap(), equilibrium_log(&lp).unwrap());
    }

    #[test]
    fn second_order_mean_examples() {
        let gbm = ModelParams::new(1.0, 0.2, 1.0, 1.0, CapacitySpec::None).unwrap();
        let m = mean_k_second_order(&gbm, 1.0, 0.5, 2.0).unwrap();
        assert_relative_eq!(m.value, 2.0 * 0.5f64.exp(), max_relative = 1e-14);
        assert!(m.valid);

        let p = linear(1.0, 0.2, 1.0, 100.0);
        assert_relative_eq!(mean_k_second_order(&p, 1.0, 0.0, 1.0).unwrap().value, 1.0, max_relative = 1e-15);
        let m = mean_k_second_order(&p, 1.0, 0.01, 1.0).unwrap();
        assert!(m.valid);
        assert_relative_eq!(m.value, 1.0099486, epsilon = 1e-7);
        assert!(!mean_k_second_order(&p, 1.0, 0.01, 50.0).unwrap().valid);
    }

    #[test]
    fn second_order_mean_matches_initial_slope() {
        // d⟨K⟩/dt at δt = 0 is ρμK(1 - ρK/K̃)
        let p = linear(0.9, 0.3, 1.0, 50.0);
        let (rho, k, h) = (1.4, 2.0, 1e-6);
        let slope = (mean_k_second_order(&p, rho, h, k).unwrap().value - k) / h;
        assert_relative_eq!(slope, rho * 0.9 * k * (1.0 - rho * k / 50.0), max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn linear_equilibrium_root_consistency(
            mu in 0.05f64..2.0,
            sigma in 0.01f64..1.0,
            k_tilde in 1.0f64..1e4,
            rho in 0.05f64..3.0,
        ) {
            let p = linear(mu, sigma, 1.0, k_tilde);
            let closed = equilibrium_linear(&p, rho).unwrap();
            let root = stochastic_equilibrium(&p, rho).unwrap();
            prop_assert_eq!(closed.is_positive(), root.is_positive());
            if closed.is_positive() {
                prop_assert!((closed.value() / root.value() - 1.0).abs() < 1e-9);
            }
        }
    }
}
