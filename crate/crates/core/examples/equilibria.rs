//! Stochastic equilibria at constant leverage: closed forms and root-finding.

use kelly_capacity::closed_form::{equilibrium_log_at, equilibrium_power, stochastic_equilibrium};
use kelly_capacity::{CapacitySpec, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let base = ModelParams::new(0.1, 0.1, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;
    for gamma in [1.0, 2.0, 3.0] {
        let p = base.with_capacity(CapacitySpec::PowerLaw { gamma });
        for rho in [0.5, 1.0, 5.0, 19.0, 25.0] {
            let closed = equilibrium_power(&p, rho)?;
            let root = stochastic_equilibrium(&p, rho)?;
            println!(
                "power gamma={gamma} rho={rho:>5}: K∞ = {:>10.5} root {:>10.5} positive={}",
                closed.value(),
                root.value(),
                closed.is_positive()
            );
        }
    }
    let log = base.with_capacity(CapacitySpec::Logarithmic { alpha: 1.0 });
    for rho in [0.5, 1.0, 2.0] {
        let ln_k = equilibrium_log_at(&log, rho)?;
        println!("log rho={rho}: K∞ = {:.5} root {:.5}", ln_k.exp(), stochastic_equilibrium(&log, rho)?.value());
    }
    Ok(())
}
