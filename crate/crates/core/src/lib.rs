//! Kelly-optimal leverage for multiplicative growth with a finite carrying
//! capacity.
//!
//! The capital obeys `dK = ρ μ̂(ρK) K dt + ρ σ K dW`, where the effective
//! drift `μ̂` decays as the invested amount approaches the capacity scale
//! `K̃`. The crate provides a Monte Carlo engine, exact pathwise solutions,
//! stationary and moment-based leverage rules, and experiment drivers.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod experiments;
pub mod leverage;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod sde_engine;

pub use error::{Error, Result};
pub use model::{CapacitySpec, LeveragePolicy, ModelParams};
pub use sde_engine::{BrownianPath, EnsembleConfig, EnsembleStats, Trajectory};
