//! Principal branch of Lambert W, including the log-argument form used for
//! the logarithmic-capacity leverage.

use kelly_capacity::leverage::{stationary_log_equation, stationary_rho_log};
use kelly_capacity::numerics::{lambert_w0, lambert_w0_exp};
use kelly_capacity::{CapacitySpec, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    for x in [-(-1.0f64).exp(), -0.2, 0.0, 1.0, std::f64::consts::E, 100.0] {
        let w = lambert_w0(x)?;
        println!("W({x:>10.6}) = {w:>12.9}   w e^w = {:>12.9}", w * w.exp());
    }
    // Arguments far beyond f64 range, given as ln x.
    for ln_x in [10.0, 1e3, 1e6] {
        println!("W(exp({ln_x})) = {:.9}", lambert_w0_exp(ln_x)?);
    }

    let p = ModelParams::new(1.0, 0.2, 1.0, 50.0, CapacitySpec::Logarithmic { alpha: 1.0 })?;
    let k = 18.39;
    let rho = stationary_rho_log(&p, k)?;
    println!("log-capacity rho at k={k}: {rho:.12}, residual {:.2e}", stationary_log_equation(&p, k, rho)?);
    Ok(())
}
