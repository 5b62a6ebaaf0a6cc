//! Optimal leverage as a function of capital for each policy.

use kelly_capacity::{CapacitySpec, LeveragePolicy, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let linear = ModelParams::new(1.0, 0.2, 1.0, 50.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;
    let cubic = linear.with_capacity(CapacitySpec::PowerLaw { gamma: 3.0 });
    let log = linear.with_capacity(CapacitySpec::Logarithmic { alpha: 1.0 });

    println!(
        "{:>8} {:>8} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "k", "thorp", "linear", "power3", "log", "moment1", "diag"
    );
    for k in [0.1, 1.0, 5.0, 18.39, 50.0, 200.0] {
        let thorp = LeveragePolicy::Thorp.rho(&linear, 0.0, k)?;
        let lin = LeveragePolicy::StationaryLinear.evaluate(&linear, 0.0, k)?;
        let pow = LeveragePolicy::StationaryPower.rho(&cubic, 0.0, k)?;
        let lg = LeveragePolicy::StationaryLog.rho(&log, 0.0, k)?;
        let m1 = LeveragePolicy::MomentFirstOrder { delta_t: 0.01 }.rho(&linear, 0.0, k)?;
        println!(
            "{k:>8.2} {thorp:>8.3} {:>10.4} {pow:>10.4} {lg:>10.4} {m1:>10.4} {:>8.3}",
            lin.rho,
            lin.diagnostics.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
