use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modes::DiscreteModes;
use super::system::{OracleSystem, Propagator, DENSE_LIMIT};
use crate::error::{Error, Result};

/// Regression fixture: modes, cutoff and spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFixture {
    pub omegas: Vec<f64>,
    pub couplings: Vec<Complex64>,
    pub delta: f64,
    pub n_max: usize,
    /// Both branch spectra merged and sorted.
    pub eigenvalues: Vec<f64>,
}

impl OracleFixture {
    pub fn capture(system: &OracleSystem) -> Result<Self> {
        if system.field_dim() > DENSE_LIMIT {
            return Err(Error::Budget {
                dimension: system.field_dim(),
                budget: DENSE_LIMIT,
            });
        }
        let p = Propagator::new(system)?;
        let mut eigenvalues: Vec<f64> = p.spectra.iter().flat_map(|s| s.energies.iter().copied()).collect();
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            omegas: system.modes.omegas.clone(),
            couplings: system.modes.couplings.clone(),
            delta: system.delta,
            n_max: system.n_max,
            eigenvalues,
        })
    }

    pub fn modes(&self) -> Result<DiscreteModes> {
        DiscreteModes::new(self.omegas.clone(), self.couplings.clone())
    }

    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        crate::output::write_atomic(path.as_ref(), text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
