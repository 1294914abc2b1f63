//! Ground energy -sum |c_j|^2 / omega_j - |Delta| against the truncated-Fock
//! oracle, with the cutoff sweep the oracle used.
//!
//! `cargo run --release --example ground_energy`

use udw::oracle::{converged_system, discretize, NmaxPolicy, Strategy};
use udw::{CouplingFunction, ModeSpace, SpatialProfile};

fn main() -> udw::Result<()> {
    let c = CouplingFunction::new(ModeSpace::massive(3, 0.5)?, SpatialProfile::gaussian(1.0)?, 2.5)?;
    for m in [1, 2, 3] {
        let modes = discretize(&c, m, Strategy::GaussPanels { k_max: 5.0 })?;
        for delta in [0.0, 0.3] {
            let (sys, g) = converged_system(&modes, delta, NmaxPolicy::default())?;
            let exact = modes.ground_energy(delta);
            println!(
                "M={m} Delta={delta}: oracle {:.12} closed {:.12} rel {:.1e} gap {:.3e} branch {:?}",
                g.energy,
                exact,
                ((g.energy - exact) / exact).abs(),
                g.gap,
                g.branch
            );
            for (n, e) in &sys.convergence {
                println!("    n_max {n:>3}  {e:.14}");
            }
        }
    }
    Ok(())
}
