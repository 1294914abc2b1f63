//! Runs the closed-form vs oracle comparison on three explicit modes and
//! prints one row per quantity.
//!
//! `cargo run --release --example oracle_validation`

use std::path::Path;

use udw::config::{RunConfig, Task};
use udw::run::validation_rows;

const CONFIG: &str = r#"{
  "model": {"modes": {"omegas": [0.8, 1.1, 1.7], "couplings": [0.25, -0.2, 0.15]}, "delta": 0.3},
  "task": {"validate": {"dynamics_tolerance": 1e-4, "betas": [1.0]}}
}"#;

fn main() -> udw::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    let Task::Validate(task) = &cfg.task else { unreachable!() };
    let report = validation_rows(&cfg, task, Path::new("."))?;
    println!("modes {}, n_max {:?}", report.modes, report.n_max);
    for r in &report.rows {
        let verdict = if r.pass { "ok" } else { "FAIL" };
        let diff = r.abs_diff.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "-".into());
        println!("{verdict:<5} {:<32} diff {diff:<10} tol {:e} {}", r.quantity, r.tolerance, r.cause.as_deref().unwrap_or(""));
    }
    println!("all pass: {}", report.all_pass);
    Ok(())
}
