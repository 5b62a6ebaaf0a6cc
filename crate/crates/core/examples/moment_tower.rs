//! Moment tower for series capacity: RK4 integration, short-horizon growth
//! Φ and its maximiser.

use kelly_capacity::moments::{
    integrate_tower, optimize_rho_numeric, phi_growth, required_truncation, rho_opt_first_order,
};
use kelly_capacity::{CapacitySpec, ModelParams};

fn main() -> kelly_capacity::Result<()> {
    let p = ModelParams::new(1.0, 0.2, 1.0, 10.0, CapacitySpec::PowerLaw { gamma: 1.0 })?;

    let m = required_truncation(1, 3);
    let tower = integrate_tower(&p, 1.0, m, 0.1, 1e-4)?;
    println!("E[K^m](0.1) for m = 0..={m}: {:?}", tower.e_values);

    for dt in [0.0, 1e-3, 1e-2] {
        let r1 = rho_opt_first_order(&p, dt)?;
        let num = optimize_rho_numeric(&p, dt, 1)?;
        println!(
            "delta_t={dt:<6} rho1={r1:.6} numeric={:.6} unimodal={} Phi={:.6}",
            num.rho,
            num.unimodal,
            phi_growth(&p, r1, dt, 1)?
        );
    }
    Ok(())
}
