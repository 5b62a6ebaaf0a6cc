//! Ensemble of leveraged GBM paths; compares ⟨log K(T)⟩ with (ρμ - ρ²σ²/2)T.

use kelly_capacity::sde_engine::{ensemble_with, StepScheme};
use kelly_capacity::{EnsembleConfig, LeveragePolicy, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let params = ModelParams::gbm(0.1, 0.2)?;
    let horizon = 5.0;
    println!("{:>6} {:>12} {:>10} {:>12}", "rho", "<log K>", "stderr", "theory");
    for rho in [0.5, 1.0, 2.5, 4.0, 5.0] {
        let cfg = EnsembleConfig::for_horizon(4000, 42, 0.01, horizon).scheme(StepScheme::LogSpace);
        let stats = ensemble_with(&params, &LeveragePolicy::Constant { rho }, &cfg)?;
        let theory = (rho * params.mu - 0.5 * rho * rho * params.sigma * params.sigma) * horizon;
        println!(
            "{rho:>6.2} {:>12.5} {:>10.5} {theory:>12.5}",
            stats.terminal_mean_log_k(),
            stats.stderr_log_k.last().unwrap()
        );
    }
    Ok(())
}
