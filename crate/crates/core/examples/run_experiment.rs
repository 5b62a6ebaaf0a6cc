//! Runs one named experiment with its default settings and writes
//! `<out>/<name>.csv` and `.meta`.
//!
//! cargo run --release --example run_experiment -- rho-vs-k [out-dir]

use std::path::PathBuf;
use std::time::Instant;

use kelly_capacity::cli::{write_result, FIGURES};
use kelly_capacity::experiments::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "return-functional".into());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));

    let start = Instant::now();
    let res = match name.as_str() {
        "logreturn-vs-rho" => logreturn_vs_rho(&LogReturnConfig::default())?,
        "kelly-vs-constant" => kelly_vs_constant(&KellyVsConstantConfig::linear())?,
        "kelly-vs-constant-log" => kelly_vs_constant(&KellyVsConstantConfig::logarithmic())?,
        "zeroth-vs-first-order" => zeroth_vs_first_order(&ZerothFirstConfig::default())?,
        "linear-regime" => linear_regime(&LinearRegimeConfig::default())?,
        "return-functional" => return_functional_sweep(&ReturnFunctionalConfig::default())?,
        "rho-vs-k" => rho_vs_k_sweep(&RhoVsKConfig::default())?,
        "log-expectation" => log_expectation(&LogExpectationConfig::default())?,
        "pathwise-convergence" => pathwise_convergence(&PathwiseConvergenceConfig::default())?,
        "second-order-mean" => second_order_mean(&SecondOrderMeanConfig::default())?,
        other => return Err(format!("unknown experiment {other}; try one of {FIGURES:?}").into()),
    };
    let (csv, _) = write_result(&res, &out, start.elapsed().as_secs_f64())?;
    println!("wrote {}", csv.display());
    for (k, v) in &res.summary {
        println!("{k:>40} = {v}");
    }
    Ok(())
}
