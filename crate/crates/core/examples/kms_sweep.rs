//! Joint thermal Weyl expectation across inverse temperatures, as CSV on
//! stdout. The last rows approach the ground-state value.
//!
//! `cargo run --example kms_sweep > sweep.csv`

use num_complex::Complex64 as C;
use udw::thermal::{beta_sweep, write_sweep_csv};
use udw::{CouplingFunction, Field, ModeSpace, QuadratureConfig, SpatialProfile, TestFunction};

fn main() -> udw::Result<()> {
    let c = CouplingFunction::new(ModeSpace::massive(3, 0.5)?, SpatialProfile::gaussian(1.0)?, 0.8)?;
    let g = TestFunction::gaussian(&c.mode_space, C::new(0.5, 0.2), 1.0, 0.0)?;
    let field = Field::Continuum(c);
    let betas: Vec<f64> = (0..16).map(|i| 0.1 * 1.6f64.powi(i)).collect();
    let rows = beta_sweep(&field, &betas, 0.4, &g, 1e-8, &QuadratureConfig::default())?;
    write_sweep_csv(&rows, std::io::stdout().lock())
}
