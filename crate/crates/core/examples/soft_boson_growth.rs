//! Mean emitted boson number N(t) for the massless n=3 Gaussian. Each
//! doubling of t adds the same amount, lambda^2 ln 2 / (2 pi^2).
//!
//! `cargo run --example soft_boson_growth`

use std::f64::consts::{LN_2, PI};

use udw::dynamics::{dyadic_increments, mean_boson_number};
use udw::{CouplingFunction, Field, ModeSpace, QuadratureConfig, SpatialProfile};

fn main() -> udw::Result<()> {
    let lambda = 1.0;
    let c = CouplingFunction::new(ModeSpace::massless(3)?, SpatialProfile::gaussian(1.0)?, lambda)?;
    let field = Field::Continuum(c);
    let q = QuadratureConfig::default();
    for e in 0..=8 {
        let t = 10f64.powf(e as f64 * 0.5);
        println!("t = {t:>10.1}  N(t) = {:.8}", mean_boson_number(&field, t, &q)?);
    }
    let expected = lambda * lambda * LN_2 / (2.0 * PI * PI);
    println!("\ndyadic increments (expected {expected:.6}):");
    for (t, d) in dyadic_increments(&field, &[1e1, 1e2, 1e3, 1e4, 1e5], &q)? {
        println!("  N({:.0}) - N({t:.0}) = {d:.6}", 2.0 * t);
    }
    Ok(())
}
