//! Classifies a handful of couplings by their R_0, R_1, R_2 integrals.
//!
//! `cargo run --example classify_couplings`

use udw::diagnostics::{classify, ir_exponent, DiagnosticSettings, IntegralVerdict};
use udw::{CouplingFunction, ModeSpace, SpatialProfile};

fn show(v: &IntegralVerdict) -> String {
    match v {
        IntegralVerdict::Finite { value, .. } => format!("{value:.6e}"),
        IntegralVerdict::Divergent { end, local_exponent } => format!("inf ({end:?}, k^{local_exponent:.2})"),
    }
}

fn main() -> udw::Result<()> {
    let gaussian = SpatialProfile::gaussian(1.0)?;
    let cases = [
        ("n=3 massive gaussian", ModeSpace::massive(3, 1.0)?, gaussian.clone()),
        ("n=3 massless gaussian", ModeSpace::massless(3)?, gaussian.clone()),
        ("n=4 massless gaussian", ModeSpace::massless(4)?, gaussian.clone()),
        ("n=3 k^0.5 gaussian", ModeSpace::massless(3)?, SpatialProfile::power_regularized(0.5, gaussian.clone())?),
        ("n=1 pointlike", ModeSpace::massless(1)?, SpatialProfile::pointlike(10.0)?),
        ("n=2 pointlike", ModeSpace::massless(2)?, SpatialProfile::pointlike(10.0)?),
    ];
    let s = DiagnosticSettings::default();
    println!("{:<24} {:<22} {:<26} {:<26} {:>8}  class", "coupling", "R_0", "R_1", "R_2", "IR(R_2)");
    for (label, space, profile) in cases {
        let c = CouplingFunction::new(space, profile, 1.0)?;
        let r = classify(&c, 0.0, &s)?;
        let p2 = ir_exponent(&c, 2, &s)?.exponent;
        println!(
            "{label:<24} {:<22} {:<26} {:<26} {p2:>8.3}  {}",
            show(&r.r0),
            show(&r.r1),
            show(&r.r2),
            r.classification
        );
    }
    Ok(())
}
