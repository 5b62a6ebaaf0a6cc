//! Exact solutions against Euler–Maruyama on one shared Brownian path.

use kelly_capacity::closed_form::{exact_linear_path, exact_log_path};
use kelly_capacity::sde_engine::{simulate_with, StepScheme};
use kelly_capacity::{BrownianPath, CapacitySpec, LeveragePolicy, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let linear = ModelParams::new(1.0, 0.3, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;
    let log = linear.with_capacity(CapacitySpec::Logarithmic { alpha: 1.0 });
    let fine = BrownianPath::generate(42, 3, 0.001, 5000)?;

    let exact_lin = exact_linear_path(&linear, 1.0, &fine)?.terminal();
    let exact_log = exact_log_path(&log, &fine)?.terminal();
    println!("exact K(T): linear {exact_lin:.6}, log {exact_log:.6}");
    println!("{:>8} {:>14} {:>14}", "dt", "|err| linear", "|err| log");
    for factor in [40, 20, 10, 5] {
        let path = fine.coarsen(factor)?;
        let rho1 = LeveragePolicy::Constant { rho: 1.0 };
        let em_lin = simulate_with(&linear, &rho1, &path, StepScheme::Direct)?.terminal();
        let em_log = simulate_with(&log, &rho1, &path, StepScheme::LogSpace)?.terminal();
        println!(
            "{:>8.4} {:>14.3e} {:>14.3e}",
            path.dt,
            (em_lin - exact_lin).abs(),
            (em_log - exact_log).abs()
        );
    }
    Ok(())
}
