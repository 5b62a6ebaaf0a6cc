//! One path under the stationary Kelly policy for linear capacity.

use kelly_capacity::sde_engine::simulate;
use kelly_capacity::{BrownianPath, CapacitySpec, LeveragePolicy, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let params = ModelParams::new(0.1, 0.1, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;
    let path = BrownianPath::generate(7, 0, 0.01, 6000)?;
    let traj = simulate(&params, &LeveragePolicy::StationaryLinear, &path)?;
    println!("{:>8} {:>12} {:>10}", "t", "K", "rho");
    for i in (0..traj.times.len()).step_by(500) {
        println!("{:>8.2} {:>12.5} {:>10.4}", traj.times[i], traj.k_values[i], traj.rho_values[i]);
    }
    println!("terminal K = {:.5}", traj.terminal());
    Ok(())
}
