//! Gapless Unruh-DeWitt detector coupled to a free scalar field.
//!
//! Couplings are classified by the infrared and ultraviolet behaviour of
//! their `R_j` integrals, the exact Heisenberg dynamics and KMS states are
//! evaluated in closed form, and a truncated-Fock oracle reproduces all of
//! it by brute-force linear algebra on finitely many modes.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod modespace;
pub mod oracle;
pub mod output;
pub mod powerlaw;
pub mod quadrature;
pub mod qubit;
pub mod run;
pub mod thermal;

pub use error::{Error, Result};
pub use field::Field;
pub use modespace::{CouplingFunction, Dispersion, ModeSpace, SpatialProfile, TestFunction};
pub use qubit::{Axis, Branch, QubitState};
pub use quadrature::QuadratureConfig;
