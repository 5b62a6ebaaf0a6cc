//! Model parameters, carrying-capacity cost functions and the effective drift.
//!
//! The capital follows `dK = ρ μ̂(ρK) K dt + ρ σ K dW`, with the effective
//! drift `μ̂(ρK) = μ (1 - f(ρK / K̃))` for the power-law and logarithmic
//! capacities. The series capacity is written directly as
//! `μ̂(ρK) = μ (1 + Σ λ_k (ρK)^{kγ})` with signed coefficients, so a power law
//! `f(x) = x^γ` corresponds to a single term `λ₁ = -(1/K̃)^γ`.

use crate::error::{Error, Result};

/// Shape of the carrying-capacity cost function `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacitySpec {
    /// No capacity; plain geometric Brownian motion.
    None,
    /// `f(x) = x^γ`.
    PowerLaw { gamma: f64 },
    /// `f(x) = α log x` (Gompertz-type growth).
    Logarithmic { alpha: f64 },
    /// Drift factor `1 + Σ λ_k (ρK)^{kγ}`; `λ₀ = 1` is implicit.
    Series { gamma: f64, lambdas: Vec<f64> },
}

impl CapacitySpec {
    pub fn name(&self) -> &'static str {
        match self {
            CapacitySpec::None => "none",
            CapacitySpec::PowerLaw { .. } => "power-law",
            CapacitySpec::Logarithmic { .. } => "logarithmic",
            CapacitySpec::Series { .. } => "series",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CapacitySpec::None => Ok(()),
            CapacitySpec::PowerLaw { gamma } | CapacitySpec::Series { gamma, .. } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "gamma",
                        value: gamma,
                        reason: "exponent must be positive",
                    })
                }
            }
            CapacitySpec::Logarithmic { alpha } => {
                if alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        reason: "strength must be positive",
                    })
                }
            }
        }
    }

    /// Series form `(γ, λ₁..λₙ)` of a polynomial capacity, using `k_tilde` to
    /// translate a power law. `None` maps to an empty series; the logarithmic
    /// capacity has no series form.
    pub fn as_series(&self, k_tilde: f64) -> Option<(f64, Vec<f64>)> {
        match self {
            CapacitySpec::None => Some((1.0, Vec::new())),
            CapacitySpec::PowerLaw { gamma } => {
                Some((*gamma, vec![-(1.0 / k_tilde).powf(*gamma)]))
            }
            CapacitySpec::Series { gamma, lambdas } => Some((*gamma, lambdas.clone())),
            CapacitySpec::Logarithmic { .. } => None,
        }
    }
}

/// Rule giving the invested fraction `ρ(t, K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeveragePolicy {
    Constant { rho: f64 },
    /// `μ/σ²`, the optimum without capacity.
    Thorp,
    /// `μ / (2μK/K̃ + σ²)` for a linear capacity.
    StationaryLinear,
    /// Root of `μ(1 - (Kρ/K̃)^γ) - ρσ² = 0`.
    StationaryPower,
    /// Lambert-W optimum for the logarithmic capacity.
    StationaryLog,
    /// Short-horizon optimum to first order in `delta_t`, linear capacity.
    MomentFirstOrder { delta_t: f64 },
}

impl LeveragePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            LeveragePolicy::Constant { .. } => "constant",
            LeveragePolicy::Thorp => "thorp",
            LeveragePolicy::StationaryLinear => "stationary-linear",
            LeveragePolicy::StationaryPower => "stationary-power",
            LeveragePolicy::StationaryLog => "stationary-log",
            LeveragePolicy::MomentFirstOrder { .. } => "moment-first-order",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Drift rate (1/time).
    pub mu: f64,
    /// Volatility (1/√time).
    pub sigma: f64,
    /// Initial capital.
    pub k0: f64,
    /// Carrying-capacity scale, in the same currency unit as `k0`.
    pub k_tilde: f64,
    pub capacity: CapacitySpec,
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64, k0: f64, k_tilde: f64, capacity: CapacitySpec) -> Result<Self> {
        let params = ModelParams {
            mu,
            sigma,
            k0,
            k_tilde,
            capacity,
        };
        params.validate()?;
        Ok(params)
    }

    /// Geometric Brownian motion with `K₀ = 1`.
    pub fn gbm(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, 1.0, 1.0, CapacitySpec::None)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, value: f64) -> Result<()> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                })
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: self.mu,
                reason: "must be finite",
            });
        }
        positive("sigma", self.sigma)?;
        positive("k0", self.k0)?;
        positive("k_tilde", self.k_tilde)?;
        self.capacity.validate()
    }

    pub fn with_k0(&self, k0: f64) -> Self {
        ModelParams { k0, ..self.clone() }
    }

    pub fn with_capacity(&self, capacity: CapacitySpec) -> Self {
        ModelParams {
            capacity,
            ..self.clone()
        }
    }
}

/// Evaluates the cost function `f(x)`.
///
/// For [`CapacitySpec::Series`] the result is `-Σ λ_k x^{kγ}` so that the
/// drift is always `μ (1 - f)`; there `x` is the raw invested amount `ρK`
/// rather than a ratio to `K̃`.
pub fn eval_f(capacity: &CapacitySpec, x: f64) -> Result<f64> {
    capacity.validate()?;
    match capacity {
        CapacitySpec::None => Ok(0.0),
        CapacitySpec::PowerLaw { gamma } => {
            if x < 0.0 {
                return Err(Error::Domain {
                    what: "power-law capacity",
                    value: x,
                });
            }
            Ok(x.powf(*gamma))
        }
        CapacitySpec::Logarithmic { alpha } => {
            if x <= 0.0 {
                return Err(Error::Domain {
                    what: "logarithmic capacity",
                    value: x,
                });
            }
            Ok(alpha * x.ln())
        }
        CapacitySpec::Series { gamma, lambdas } => {
            if x < 0.0 {
                return Err(Error::Domain {
                    what: "series capacity",
                    value: x,
                });
            }
            let base = x.powf(*gamma);
            let mut power = 1.0;
            let mut sum = 0.0;
            for lambda in lambdas {
                power *= base;
                sum += lambda * power;
            }
            Ok(-sum)
        }
    }
}

/// Effective drift `μ̂` for an invested amount `rho_k = ρK`.
pub fn drift_mu_hat(params: &ModelParams, rho_k: f64) -> Result<f64> {
    let f = match params.capacity {
        CapacitySpec::Series { .. } => eval_f(&params.capacity, rho_k)?,
        _ => eval_f(&params.capacity, rho_k / params.k_tilde)?,
    };
    Ok(params.mu * (1.0 - f))
}

/// `K μ̂(K)` at unit leverage.
pub fn return_functional(params: &ModelParams, k: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::Domain {
            what: "return functional",
            value: k,
        });
    }
    Ok(k * drift_mu_hat(params, k)?)
}
