//! Short-horizon mean capital under linear capacity, analytic expansion.

use kelly_capacity::closed_form::mean_k_second_order;
use kelly_capacity::{CapacitySpec, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let p = ModelParams::new(1.0, 0.2, 1.0, 100.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;
    for k in [0.1, 1.0, 5.0, 20.0] {
        let m = mean_k_second_order(&p, 1.0, 0.01, k)?;
        println!("k={k:<5} <K(t+0.01)> = {:.8} ratio {:.6} valid={}", m.value, m.value / k, m.valid);
    }
    Ok(())
}
