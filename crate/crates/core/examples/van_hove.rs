//! Van Hove conditions of the first and second type, split at omega_0.
//!
//! `cargo run --example van_hove`

use udw::diagnostics::{van_hove_conditions, DiagnosticSettings};
use udw::{CouplingFunction, ModeSpace, SpatialProfile};

fn main() -> udw::Result<()> {
    let s = DiagnosticSettings::default().with_omega0(0.5);
    println!("{:<10} {:<4} {:<10} {:>8} {:>8}", "profile", "n", "mass", "first", "second");
    for n in 1..=4 {
        for mass in [0.0, 0.5] {
            for (name, profile) in [
                ("gaussian", SpatialProfile::gaussian(1.0)?),
                ("lorentzian", SpatialProfile::lorentzian(1.0)?),
            ] {
                let space = if mass > 0.0 { ModeSpace::massive(n, mass)? } else { ModeSpace::massless(n)? };
                let c = CouplingFunction::new(space, profile, 1.0)?;
                let v = van_hove_conditions(&c, &s)?;
                println!("{name:<10} {n:<4} {mass:<10} {:>8} {:>8}", v.first_type, v.second_type);
            }
        }
    }
    Ok(())
}
