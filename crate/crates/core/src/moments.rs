//! Moment tower for series capacities and the short-horizon optimum.
//!
//! For `dK = ρμK(1 + Σ λ_k (ρK)^{kγ}) dt + σρK dW` the moments
//! `e_m = ⟨K^{mγ}⟩` obey
//!
//! ```text
//! ė_m = μργm Σ_{k=0..n} λ_k ρ^{kγ} e_{m+k} + γm(γm - 1) σ²ρ²/2 e_m,   λ₀ = 1
//! ```
//!
//! Starting from a point mass at `K₀`, `e_m(t₀) = K₀^{mγ}` and the growth
//! rate `d⟨log K⟩/dt` can be Taylor-expanded in the horizon `δt` using only
//! values at `t₀`, with no closure assumption.

use crate::error::{Error, Result};
use crate::model::{CapacitySpec, ModelParams};
use crate::numerics::golden_section_max;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTowerState {
    pub gamma: f64,
    pub lambdas: Vec<f64>,
    pub rho: f64,
    /// `e_0 ..= e_M`, with `e_0 = 1`.
    pub e_values: Vec<f64>,
}

impl MomentTowerState {
    /// Point-mass moments `e_m = K₀^{mγ}` for `m = 0..=truncation`.
    pub fn dirac(gamma: f64, lambdas: Vec<f64>, rho: f64, k0: f64, truncation: usize) -> Self {
        let base = k0.powf(gamma);
        let e_values = (0..=truncation).map(|m| base.powi(m as i32)).collect();
        MomentTowerState {
            gamma,
            lambdas,
            rho,
            e_values,
        }
    }

    pub fn truncation(&self) -> usize {
        self.e_values.len() - 1
    }

    fn n(&self) -> usize {
        self.lambdas.len()
    }
}

fn level_rate(state: &MomentTowerState, params: &ModelParams, m: usize) -> Result<f64> {
    let needed = m + state.n();
    if needed > state.truncation() {
        return Err(Error::InsufficientTruncation {
            needed,
            available: state.truncation(),
        });
    }
    let MomentTowerState {
        gamma,
        ref lambdas,
        rho,
        ref e_values,
    } = *state;
    let gm = gamma * m as f64;
    let rho_g = rho.powf(gamma);
    let mut sum = e_values[m];
    let mut rho_pow = 1.0;
    for (k, lambda) in lambdas.iter().enumerate() {
        rho_pow *= rho_g;
        sum += lambda * rho_pow * e_values[m + k + 1];
    }
    let s2 = params.sigma * params.sigma;
    Ok(params.mu * rho * gm * sum + gm * (gm - 1.0) * 0.5 * s2 * rho * rho * e_values[m])
}

/// `ė_m` for `m = 1..=M-n`; element `i` holds `ė_{i+1}`.
pub fn tower_rhs(state: &MomentTowerState, params: &ModelParams) -> Result<Vec<f64>> {
    let top = state.truncation().checked_sub(state.n()).unwrap_or(0);
    if top == 0 {
        return Err(Error::InsufficientTruncation {
            needed: 1 + state.n(),
            available: state.truncation(),
        });
    }
    (1..=top).map(|m| level_rate(state, params, m)).collect()
}

fn series_of(params: &ModelParams, operation: &'static str) -> Result<(f64, Vec<f64>)> {
    params.validate()?;
    params
        .capacity
        .as_series(params.k_tilde)
        .ok_or(Error::UnsupportedCapacity {
            operation,
            capacity: params.capacity.name(),
        })
}

/// Levels needed for an order-`p` expansion of a length-`n` series.
pub fn required_truncation(n: usize, order: usize) -> usize {
    (order + 1) * n.max(1)
}

/// `d⟨log K⟩/dt` at `t₀ + δt`, to order 0 or 1 in `δt`, starting from `K₀`.
///
/// Power-law and empty capacities are converted to their series form.
pub fn phi_growth(params: &ModelParams, rho: f64, delta_t: f64, order: usize) -> Result<f64> {
    if order > 1 {
        return Err(Error::UnsupportedOrder(order));
    }
    let (gamma, lambdas) = series_of(params, "phi_growth")?;
    let n = lambdas.len();
    let state =
        MomentTowerState::dirac(gamma, lambdas, rho, params.k0, required_truncation(n, order));

    let rho_g = rho.powf(gamma);
    let weighted = |values: &dyn Fn(usize) -> Result<f64>| -> Result<f64> {
        let mut sum = 0.0;
        let mut rho_pow = 1.0;
        for (k, lambda) in state.lambdas.iter().enumerate() {
            rho_pow *= rho_g;
            sum += lambda * rho_pow * values(k + 1)?;
        }
        Ok(sum)
    };

    let s2 = params.sigma * params.sigma;
    let phi0 = params.mu * rho * (1.0 + weighted(&|k| Ok(state.e_values[k]))?) - 0.5 * s2 * rho * rho;
    if order == 0 || delta_t == 0.0 {
        return Ok(phi0);
    }
    let phi1 = params.mu * rho * weighted(&|k| level_rate(&state, params, k))?;
    Ok(phi0 + phi1 * delta_t)
}

/// First-order short-horizon optimum for the linear capacity,
/// `μ/(2μK₀/K̃ + σ²) - (3K̃³μ⁴σ²K₀ + 2K̃²μ⁵K₀²)/(2μK₀ + K̃σ²)⁴ δt`.
pub fn rho_opt_first_order_at(mu: f64, sigma: f64, k_tilde: f64, k0: f64, delta_t: f64) -> Result<f64> {
    if !(delta_t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta_t",
            value: delta_t,
            reason: "horizon must be non-negative",
        });
    }
    let s2 = sigma * sigma;
    let zeroth = mu / (2.0 * mu * k0 / k_tilde + s2);
    if delta_t == 0.0 || k_tilde.is_infinite() {
        return Ok(zeroth);
    }
    let d = 2.0 * mu * k0 + k_tilde * s2;
    let correction = -(3.0 * k_tilde.powi(3) * mu.powi(4) * s2 * k0
        + 2.0 * k_tilde * k_tilde * mu.powi(5) * k0 * k0)
        / d.powi(4);
    Ok(zeroth + correction * delta_t)
}

/// Capacity scale of a linear capacity given as a power law or a one-term
/// series with `γ = 1` and `λ₁ < 0`.
fn linear_scale(params: &ModelParams) -> Result<f64> {
    match &params.capacity {
        CapacitySpec::PowerLaw { gamma } if *gamma == 1.0 => Ok(params.k_tilde),
        CapacitySpec::Series { gamma, lambdas }
            if *gamma == 1.0 && lambdas.len() == 1 && lambdas[0] < 0.0 =>
        {
            Ok(-1.0 / lambdas[0])
        }
        other => Err(Error::UnsupportedCapacity {
            operation: "rho_opt_first_order",
            capacity: other.name(),
        }),
    }
}

/// [`rho_opt_first_order_at`] with `K₀` and `K̃` taken from `params`.
pub fn rho_opt_first_order(params: &ModelParams, delta_t: f64) -> Result<f64> {
    let k_tilde = linear_scale(params)?;
    rho_opt_first_order_at(params.mu, params.sigma, k_tilde, params.k0, delta_t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedRho {
    pub rho: f64,
    /// `false` when the scan found several local maxima and the grid argmax
    /// was returned instead of a golden-section refinement.
    pub unimodal: bool,
}

const SCAN_POINTS: usize = 400;

/// Maximiser of [`phi_growth`] over `ρ ∈ (0, 2μ/σ²]`.
pub fn optimize_rho_numeric(params: &ModelParams, delta_t: f64, order: usize) -> Result<OptimizedRho> {
    if order > 1 {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(params.mu > 0.0) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: params.mu,
            reason: "search interval (0, 2μ/σ²] is empty",
        });
    }
    let hi = 2.0 * params.mu / (params.sigma * params.sigma);
    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| hi * i as f64 / SCAN_POINTS as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&r| phi_growth(params, r, delta_t, order))
        .collect::<Result<Vec<f64>>>()?;

    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });

    let rises = values[..=best].windows(2).all(|w| w[1] >= w[0]);
    let falls = values[best..].windows(2).all(|w| w[1] <= w[0]);
    if !(rises && falls) {
        return Ok(OptimizedRho {
            rho: grid[best],
            unimodal: false,
        });
    }

    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let up = grid[(best + 1).min(SCAN_POINTS - 1)];
    // Golden section only compares values, so a failed evaluation is -∞.
    let objective = |r: f64| phi_growth(params, r, delta_t, order).unwrap_or(f64::NEG_INFINITY);
    let rho = golden_section_max(objective, lo, up, 1e-12).min(hi);
    Ok(OptimizedRho {
        rho,
        unimodal: true,
    })
}

/// Integrates the truncated tower with fixed-step RK4 from point-mass
/// initial moments. Levels `M+1..=M+n` stay frozen at their initial values,
/// which is only reasonable over short horizons.
pub fn integrate_tower(
    params: &ModelParams,
    rho: f64,
    truncation: usize,
    horizon: f64,
    dt: f64,
) -> Result<MomentTowerState> {
    let (gamma, lambdas) = series_of(params, "integrate_tower")?;
    let n = lambdas.len();
    let mut state = MomentTowerState::dirac(gamma, lambdas, rho, params.k0, truncation + n);
    let steps = (horizon / dt).round() as usize;

    let rates = |s: &MomentTowerState| -> Result<Vec<f64>> {
        (1..=truncation).map(|m| level_rate(s, params, m)).collect()
    };
    let shifted = |base: &MomentTowerState, k: &[f64], scale: f64| -> MomentTowerState {
        let mut s = base.clone();
        for (m, km) in k.iter().enumerate() {
            s.e_values[m + 1] += scale * km;
        }
        s
    };

    for _ in 0..steps {
        let k1 = rates(&state)?;
        let k2 = rates(&shifted(&state, &k1, 0.5 * dt))?;
        let k3 = rates(&shifted(&state, &k2, 0.5 * dt))?;
        let k4 = rates(&shifted(&state, &k3, dt))?;
        for m in 0..truncation {
            state.e_values[m + 1] += dt / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        }
    }
    state.e_values.truncate(truncation + 1);
    Ok(state)
}
