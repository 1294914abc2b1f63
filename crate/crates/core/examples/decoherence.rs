//! Decoherence of a qubit coupled to the massless n=3 Gaussian field.
//!
//! The qubit starts in 0.8|e> + 0.6|g>, the field in its vacuum. Gamma(t)
//! keeps growing like ln t, since R_2 diverges; sigma^x is conserved.
//!
//! `cargo run --example decoherence`

use num_complex::Complex64 as C;
use udw::dynamics::{decoherence, evolve_sigma, reduced_qubit, state_expectation, Gapless, StateSpec};
use udw::{Axis, CouplingFunction, Field, ModeSpace, QuadratureConfig, QubitState, SpatialProfile};

fn main() -> udw::Result<()> {
    let c = CouplingFunction::new(ModeSpace::massless(3)?, SpatialProfile::gaussian(1.0)?, 1.0)?;
    let field = Field::Continuum(c);
    let model = Gapless::with_delta(0.2)?;
    let q = QuadratureConfig::default();
    let state = StateSpec::ProductInitial {
        qubit: QubitState::pure_z(C::new(0.8, 0.0), C::new(0.6, 0.0))?,
        field: Box::new(StateSpec::Vacuum),
    };
    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "t", "Gamma", "entropy", "<sigma_x>", "<sigma_y>");
    for i in 0..=24 {
        let t = 0.25 * i as f64 * (1.0 + i as f64 / 4.0);
        let gamma = decoherence(&field, t, &q)?;
        let s = reduced_qubit(&field, &state, t, &model, &q)?.entropy;
        let x = state_expectation(&field, &state, &evolve_sigma(&field, Axis::X, t, &model, &q)?, &q)?;
        let y = state_expectation(&field, &state, &evolve_sigma(&field, Axis::Y, t, &model, &q)?, &q)?;
        println!("{t:>8.3} {gamma:>14.8} {s:>14.8} {:>14.8} {:>14.8}", x.re, y.re);
    }
    Ok(())
}
