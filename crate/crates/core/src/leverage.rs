//! Optimal leverage in the quasi-stationary approximation.
//!
//! Each rule maximises the instantaneous expected log-growth
//! `ρμ̂(ρK) - ρ²σ²/2` at the current capital, treating `ρ` as slowly varying
//! compared with `K`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{CapacitySpec, LeveragePolicy, ModelParams};
use crate::moments;
use crate::numerics::{find_root, lambert_w0_exp, RootBracket};

/// Lower end of the bracket for the power-law root.
const RHO_FLOOR: f64 = 1e-12;

/// `μ/σ²`.
pub fn thorp_rho(mu: f64, sigma: f64) -> f64 {
    mu / (sigma * sigma)
}

fn linear_capacity(params: &ModelParams, operation: &'static str) -> Result<()> {
    match params.capacity {
        CapacitySpec::PowerLaw { gamma } if gamma == 1.0 => Ok(()),
        ref other => Err(Error::UnsupportedCapacity {
            operation,
            capacity: other.name(),
        }),
    }
}

fn non_negative_k(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "capital",
            value: k,
        })
    }
}

/// `μ / (2μk/K̃ + σ²)`, the linear-capacity optimum including the
/// functional-derivative term.
pub fn stationary_rho_linear(params: &ModelParams, k: f64) -> Result<f64> {
    linear_capacity(params, "stationary_rho_linear")?;
    non_negative_k(k)?;
    let ModelParams {
        mu, sigma, k_tilde, ..
    } = *params;
    Ok((mu / (2.0 * mu * k / k_tilde + sigma * sigma)).max(0.0))
}

/// Root in `(0, μ/σ²]` of `μ(1 - (kρ/K̃)^γ) - ρσ² = 0`.
///
/// At `γ = 1` this is `μ / (μk/K̃ + σ²)`, which lacks the factor two of
/// [`stationary_rho_linear`]. Returns 0 when `μ ≤ 0`.
pub fn stationary_rho_power(params: &ModelParams, k: f64) -> Result<f64> {
    let gamma = match params.capacity {
        CapacitySpec::PowerLaw { gamma } => gamma,
        ref other => {
            return Err(Error::UnsupportedCapacity {
                operation: "stationary_rho_power",
                capacity: other.name(),
            })
        }
    };
    non_negative_k(k)?;
    let ModelParams {
        mu, sigma, k_tilde, ..
    } = *params;
    if mu <= 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    let hi = mu / s2;
    let g = |rho: f64| mu * (1.0 - (k * rho / k_tilde).powf(gamma)) - rho * s2;
    find_root(g, RootBracket::new(RHO_FLOOR, hi).with_tol(1e-14 * hi))
}

/// Left-hand side of the logarithmic-capacity stationarity condition,
/// `αμ(log(K̃/ρ) - log k) + μ(1 - α) - ρσ²`, with `k` in units of `K₀ = 1`.
pub fn stationary_log_equation(params: &ModelParams, k: f64, rho: f64) -> Result<f64> {
    let alpha = log_alpha(params, "stationary_log_equation")?;
    let ModelParams {
        mu, sigma, k_tilde, ..
    } = *params;
    Ok(alpha * mu * ((k_tilde / rho).ln() - k.ln()) + mu * (1.0 - alpha) - rho * sigma * sigma)
}

fn log_alpha(params: &ModelParams, operation: &'static str) -> Result<f64> {
    match params.capacity {
        CapacitySpec::Logarithmic { alpha } => Ok(alpha),
        ref other => Err(Error::UnsupportedCapacity {
            operation,
            capacity: other.name(),
        }),
    }
}

/// `ρ = α W(e^{1/α - 1} K̃σ² / (αkμ)) μ/σ²` with capital measured in units of
/// `K₀ = 1`. Returns 0 when `μ ≤ 0`.
pub fn stationary_rho_log(params: &ModelParams, k: f64) -> Result<f64> {
    let alpha = log_alpha(params, "stationary_rho_log")?;
    if !(k > 0.0) {
        return Err(Error::Domain {
            what: "capital",
            value: k,
        });
    }
    let ModelParams {
        mu, sigma, k_tilde, ..
    } = *params;
    if mu <= 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    let ln_arg = 1.0 / alpha - 1.0 + (k_tilde * s2 / (alpha * k * mu)).ln();
    let w = lambert_w0_exp(ln_arg)?;
    Ok(alpha * w * mu / s2)
}

/// Ratio `ξ = K/K̃` at which the logarithmic-capacity optimum equals one:
/// `ξ = exp((1 - σ²/μ)/α - 1)`.
pub fn critical_xi_log(params: &ModelParams) -> Result<f64> {
    let alpha = log_alpha(params, "critical_xi_log")?;
    let ModelParams { mu, sigma, .. } = *params;
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter {
            name: "mu",
            value: mu,
            reason: "must be positive",
        });
    }
    Ok(((1.0 - sigma * sigma / mu) / alpha - 1.0).exp())
}

/// `|∂ₜρ / (∂ₜK/K)|` along the linear-capacity optimum,
/// `2μ² (k/K̃) / (2μk/K̃ + σ²)²`. The quasi-stationary approximation needs
/// this to be well below one.
pub fn stationarity_diagnostic(params: &ModelParams, k: f64) -> Result<f64> {
    linear_capacity(params, "stationarity_diagnostic")?;
    non_negative_k(k)?;
    let ModelParams {
        mu, sigma, k_tilde, ..
    } = *params;
    let xi = k / k_tilde;
    let denom = 2.0 * mu * xi + sigma * sigma;
    Ok(2.0 * mu * mu * xi / (denom * denom))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityKind {
    Linear,
    Logarithmic,
}

impl FromStr for CapacityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "power" => Ok(CapacityKind::Linear),
            "log" | "logarithmic" => Ok(CapacityKind::Logarithmic),
            other => Err(Error::Unknown {
                kind: "capacity kind",
                name: other.to_string(),
            }),
        }
    }
}

/// Slope of `⟨K(T)⟩` in the late linear regime under the Kelly policy:
/// `μK̃/4` for linear capacity and `μK̃` for logarithmic capacity.
pub fn asymptotic_slope(params: &ModelParams, kind: CapacityKind) -> f64 {
    match kind {
        CapacityKind::Linear => params.mu * params.k_tilde / 4.0,
        CapacityKind::Logarithmic => params.mu * params.k_tilde,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvaluation {
    pub rho: f64,
    pub method: LeveragePolicy,
    /// Stationarity ratio, where the policy has one.
    pub diagnostics: Option<f64>,
}

impl LeveragePolicy {
    /// `ρ(t, k)`; never negative.
    pub fn rho(&self, params: &ModelParams, _t: f64, k: f64) -> Result<f64> {
        match *self {
            LeveragePolicy::Constant { rho } => {
                if rho >= 0.0 && rho.is_finite() {
                    Ok(rho)
                } else {
                    Err(Error::InvalidParameter {
                        name: "rho",
                        value: rho,
                        reason: "constant leverage must be non-negative",
                    })
                }
            }
            LeveragePolicy::Thorp => Ok(thorp_rho(params.mu, params.sigma).max(0.0)),
            LeveragePolicy::StationaryLinear => stationary_rho_linear(params, k),
            LeveragePolicy::StationaryPower => stationary_rho_power(params, k),
            LeveragePolicy::StationaryLog => stationary_rho_log(params, k),
            LeveragePolicy::MomentFirstOrder { delta_t } => {
                linear_capacity(params, "moment-first-order policy")?;
                non_negative_k(k)?;
                let rho = moments::rho_opt_first_order_at(
                    params.mu,
                    params.sigma,
                    params.k_tilde,
                    k,
                    delta_t,
                )?;
                // A long horizon can push the linear correction below zero.
                Ok(rho.max(0.0))
            }
        }
    }

    pub fn evaluate(&self, params: &ModelParams, t: f64, k: f64) -> Result<PolicyEvaluation> {
        let rho = self.rho(params, t, k)?;
        let diagnostics = match self {
            LeveragePolicy::StationaryLinear | LeveragePolicy::MomentFirstOrder { .. } => {
                Some(stationarity_diagnostic(params, k)?)
            }
            _ => None,
        };
        Ok(PolicyEvaluation {
            rho,
            method: *self,
            diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::bisect;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn power(gamma: f64, mu: f64, sigma: f64, k_tilde: f64) -> ModelParams {
        ModelParams::new(mu, sigma, 1.0, k_tilde, CapacitySpec::PowerLaw { gamma }).unwrap()
    }

    fn log(alpha: f64, mu: f64, sigma: f64, k_tilde: f64) -> ModelParams {
        ModelParams::new(mu, sigma, 1.0, k_tilde, CapacitySpec::Logarithmic { alpha }).unwrap()
    }

    #[test]
    fn thorp_examples() {
        assert_eq!(thorp_rho(2.0, 1.0), 2.0);
        assert_eq!(thorp_rho(0.09, 0.3), 0.09 / (0.3 * 0.3));
        assert_relative_eq!(thorp_rho(1.0, 0.2), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_examples() {
        let p = power(1.0, 1.0, 0.2, 50.0);
        assert_relative_eq!(stationary_rho_linear(&p, 0.0).unwrap(), thorp_rho(1.0, 0.2));
        assert_relative_eq!(stationary_rho_linear(&p, 24.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(stationary_rho_linear(&p, 3.0).unwrap() > stationary_rho_linear(&p, 4.0).unwrap());
        assert!(stationary_rho_linear(&p, -1.0).is_err());
        assert!(stationary_rho_linear(&power(2.0, 1.0, 0.2, 50.0), 1.0).is_err());
    }

    #[test]
    fn power_root_examples() {
        let p = power(1.0, 1.0, 0.2, 50.0);
        let oracle = bisect(
            |r| 1.0 - r * 0.04 - r * 24.0 / 50.0,
            RootBracket::new(0.0, 25.0).with_tol(1e-15),
        )
        .unwrap();
        // 1 / (0.04 + 0.48)
        assert_relative_eq!(oracle, 1.923_076_923_076_923, epsilon = 1e-12);
        assert_relative_eq!(stationary_rho_power(&p, 24.0).unwrap(), oracle, epsilon = 1e-10);

        let p2 = power(2.0, 1.0, 0.2, 50.0);
        let k = 1e3 * 50.0;
        let rho = stationary_rho_power(&p2, k).unwrap();
        assert!((rho / (50.0 / k) - 1.0).abs() < 0.01);

        let p5 = power(5.0, 1.0, 0.2, 50.0);
        assert_relative_eq!(stationary_rho_power(&p5, 1e-9).unwrap(), 25.0, max_relative = 1e-9);
        assert_relative_eq!(stationary_rho_power(&p5, 0.0).unwrap(), 25.0, max_relative = 1e-12);
    }

    #[test]
    fn power_root_differs_from_linear_by_derivative_term() {
        let p = power(1.0, 0.7, 0.3, 20.0);
        for &k in &[0.5, 3.0, 19.0] {
            let with_term = stationary_rho_linear(&p, k).unwrap();
            let without = stationary_rho_power(&p, k).unwrap();
            assert!((0.7 - with_term * 0.09 - 2.0 * 0.7 * with_term * k / 20.0).abs() < 1e-12);
            assert!((0.7 - without * 0.09 - 0.7 * without * k / 20.0).abs() < 1e-10);
            assert!(without > with_term);
        }
    }

    #[test]
    fn log_examples() {
        let (mu, sigma, k_tilde) = (1.0, 0.2, 50.0);
        let p = log(1.0, mu, sigma, k_tilde);
        // K̃σ²/(kμ) = 1
        let k = k_tilde * sigma * sigma / mu;
        let omega = crate::numerics::lambert_w0(1.0).unwrap();
        assert_relative_eq!(
            stationary_rho_log(&p, k).unwrap(),
            omega * mu / (sigma * sigma),
            max_relative = 1e-12
        );
        assert_relative_eq!(omega, 0.5671, epsilon = 1e-4);

        let small = log(1e-3, mu, sigma, k_tilde);
        for &k in &[0.1, 1.0, 10.0] {
            let rho = stationary_rho_log(&small, k).unwrap();
            assert!((rho / 25.0 - 1.0).abs() < 0.01, "k = {k}: {rho}");
        }
    }

    #[test]
    fn log_matches_bisection_of_stationary_equation() {
        let p = log(1.0, 1.0, 0.2, 50.0);
        for &k in &[0.3, 1.0, 18.39, 70.0, 500.0] {
            let rho = stationary_rho_log(&p, k).unwrap();
            let oracle = bisect(
                |r| stationary_log_equation(&p, k, r).unwrap(),
                RootBracket::new(1e-9, 1e4).with_tol(1e-15),
            )
            .unwrap();
            assert!((rho - oracle).abs() <= 1e-8 * oracle.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn xi_examples() {
        let p = log(1.0, 0.04, 0.2, 50.0);
        assert_relative_eq!(critical_xi_log(&p).unwrap(), (-1f64).exp(), epsilon = 1e-15);
        let big = log(1e9, 1.0, 0.5, 50.0);
        assert_relative_eq!(critical_xi_log(&big).unwrap(), (-1f64).exp(), epsilon = 1e-8);

        for (alpha, mu, sigma) in [(1.0, 1.0, 0.2), (0.5, 0.3, 0.4), (2.0, 0.1, 0.1)] {
            let p = log(alpha, mu, sigma, 10.0);
            let xi = critical_xi_log(&p).unwrap();
            let rho = stationary_rho_log(&p, xi * 10.0).unwrap();
            assert!((rho - 1.0).abs() < 1e-6, "{alpha} {mu} {sigma}: {rho}");
        }
    }

    #[test]
    fn diagnostic_examples() {
        let p = power(1.0, 1.0, 0.2, 50.0);
        assert_eq!(stationarity_diagnostic(&p, 0.0).unwrap(), 0.0);
        // 2 / 0.08² · 0.02
        assert_relative_eq!(stationarity_diagnostic(&p, 1.0).unwrap(), 6.25, epsilon = 1e-12);
        let a = stationarity_diagnostic(&power(1.0, 1.0, 0.2, 1e3), 1.0).unwrap();
        let b = stationarity_diagnostic(&power(1.0, 1.0, 0.2, 1e9), 1.0).unwrap();
        assert!(b < a && b < 1e-5);
    }

    #[test]
    fn diagnostic_matches_finite_difference_along_policy() {
        let p = power(1.0, 0.8, 0.3, 40.0);
        let k = 7.0;
        let h = 1e-6;
        let drho_dk = (stationary_rho_linear(&p, k + h).unwrap()
            - stationary_rho_linear(&p, k - h).unwrap())
            / (2.0 * h);
        // |∂ₜρ / (∂ₜK/K)| = |dρ/dK| K
        let fd = drho_dk.abs() * k;
        assert_relative_eq!(stationarity_diagnostic(&p, k).unwrap(), fd, max_relative = 1e-6);
    }

    #[test]
    fn slopes() {
        let p = power(1.0, 1.0, 0.2, 10.0);
        assert_eq!(asymptotic_slope(&p, CapacityKind::Linear), 2.5);
        assert_eq!(asymptotic_slope(&p, CapacityKind::Logarithmic), 10.0);
        let huge = power(1.0, 1.0, 0.2, 1e12);
        assert!(asymptotic_slope(&huge, CapacityKind::Linear) > 1e11);
        assert!("cubic".parse::<CapacityKind>().is_err());
        assert_eq!("log".parse::<CapacityKind>().unwrap(), CapacityKind::Logarithmic);
    }

    #[test]
    fn policy_dispatch() {
        let p = power(1.0, 1.0, 0.2, 50.0);
        assert_relative_eq!(LeveragePolicy::Thorp.rho(&p, 0.0, 3.0).unwrap(), 25.0, max_relative = 1e-15);
        assert_eq!(LeveragePolicy::Constant { rho: 0.4 }.rho(&p, 0.0, 3.0).unwrap(), 0.4);
        assert!(LeveragePolicy::Constant { rho: -0.4 }.rho(&p, 0.0, 3.0).is_err());
        assert!(LeveragePolicy::StationaryLog.rho(&p, 0.0, 3.0).is_err());
        let eval = LeveragePolicy::StationaryLinear.evaluate(&p, 0.0, 1.0).unwrap();
        assert_relative_eq!(eval.diagnostics.unwrap(), 6.25, epsilon = 1e-12);
        let first = LeveragePolicy::MomentFirstOrder { delta_t: 0.0 }.rho(&p, 0.0, 2.0).unwrap();
        assert_relative_eq!(first, stationary_rho_linear(&p, 2.0).unwrap(), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn stationary_policies_decrease_and_stay_below_thorp(
            mu in 0.1f64..2.0,
            sigma in 0.1f64..1.0,
            k_tilde in 5.0f64..500.0,
            gamma in 0.5f64..5.0,
            alpha in 0.1f64..3.0,
            k in 0.01f64..100.0,
            dk in 0.01f64..10.0,
        ) {
            let thorp = thorp_rho(mu, sigma);
            let lin = power(1.0, mu, sigma, k_tilde);
            let pow = power(gamma, mu, sigma, k_tilde);
            let lg = log(alpha, mu, sigma, k_tilde);

            let a = stationary_rho_linear(&lin, k).unwrap();
            let b = stationary_rho_linear(&lin, k + dk).unwrap();
            prop_assert!(b < a && a <= thorp);

            let a = stationary_rho_power(&pow, k).unwrap();
            let b = stationary_rho_power(&pow, k + dk).unwrap();
            prop_assert!(b < a && a <= thorp * (1.0 + 1e-12));

            let a = stationary_rho_log(&lg, k).unwrap();
            let b = stationary_rho_log(&lg, k + dk).unwrap();
            prop_assert!(b < a);
            prop_assert!(a >= 0.0);
        }
    }
}
