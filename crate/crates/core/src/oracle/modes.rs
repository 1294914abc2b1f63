use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{r_integral, DiagnosticSettings, Region};
use crate::error::{Error, Result};
use crate::field::{Field, Mode};
use crate::modespace::{sphere_area, CouplingFunction};
use crate::quadrature::{gauss_legendre, QuadratureConfig, Upper};

/// Tail of `R_0` beyond `k_max`, relative to the whole, above which a grid is
/// refused.
pub const TAIL_MASS_LIMIT: f64 = 1e-10;

const PANEL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Midpoint rule on `M` equal cells of `[0, k_max]`.
    LinearGrid { k_max: f64 },
    /// Gauss-Legendre panels of up to 16 nodes on `[0, k_max]`.
    GaussPanels { k_max: f64 },
}

impl Strategy {
    pub fn k_max(&self) -> f64 {
        match *self {
            Strategy::LinearGrid { k_max } | Strategy::GaussPanels { k_max } => k_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscretizationMeta {
    pub strategy: Option<Strategy>,
    /// `sum_j |c_j|^2 / omega_j`.
    pub r1_discrete: f64,
    pub r1_continuum: Option<f64>,
    pub r1_continuum_error: Option<f64>,
    pub tail_mass: Option<f64>,
}

/// A finite set of field modes with effective couplings `c_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModes {
    pub omegas: Vec<f64>,
    pub couplings: Vec<Complex64>,
    pub momenta: Vec<f64>,
    pub weights: Vec<f64>,
    pub meta: DiscretizationMeta,
}

impl DiscreteModes {
    /// Modes given directly; sorted by frequency.
    pub fn new(omegas: Vec<f64>, couplings: Vec<Complex64>) -> Result<Self> {
        if omegas.is_empty() || omegas.len() != couplings.len() {
            return Err(Error::Domain(format!(
                "need matching non-empty frequency and coupling lists, got {} and {}",
                omegas.len(),
                couplings.len()
            )));
        }
        if omegas.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Domain("mode frequencies must be positive and finite".into()));
        }
        if couplings.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("mode couplings must be finite".into()));
        }
        let m = omegas.len();
        Self::assemble(omegas.clone(), couplings, omegas, vec![1.0; m], None, None)
    }

    /// Real couplings.
    pub fn real(omegas: &[f64], couplings: &[f64]) -> Result<Self> {
        Self::new(
            omegas.to_vec(),
            couplings.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    fn assemble(
        omegas: Vec<f64>,
        couplings: Vec<Complex64>,
        momenta: Vec<f64>,
        weights: Vec<f64>,
        strategy: Option<Strategy>,
        continuum: Option<(f64, f64, f64)>,
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..omegas.len()).collect();
        order.sort_by(|&a, &b| omegas[a].total_cmp(&omegas[b]).then(a.cmp(&b)));
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let omegas_sorted = pick(&omegas);
        let couplings: Vec<Complex64> = order.iter().map(|&i| couplings[i]).collect();
        let r1_discrete = omegas_sorted
            .iter()
            .zip(&couplings)
            .map(|(w, c)| c.norm_sqr() / w)
            .sum();
        Ok(Self {
            momenta: pick(&momenta),
            weights: pick(&weights),
            omegas: omegas_sorted,
            couplings,
            meta: DiscretizationMeta {
                strategy,
                r1_discrete,
                r1_continuum: continuum.map(|c| c.0),
                r1_continuum_error: continuum.map(|c| c.1),
                tail_mass: continuum.map(|c| c.2),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn mode(&self, j: usize) -> Mode {
        Mode {
            index: j,
            k: self.momenta[j],
            omega: self.omegas[j],
            coupling: self.couplings[j],
        }
    }

    /// Couplings multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.couplings {
            *c *= s;
        }
        out.meta.r1_discrete *= s * s;
        out
    }

    /// `sum_j |c_j|^2 / omega_j`.
    pub fn r1(&self) -> f64 {
        self.meta.r1_discrete
    }

    /// Discrete ground energy `-sum_j |c_j|^2 / omega_j - |Delta|`.
    pub fn ground_energy(&self, delta: f64) -> f64 {
        -self.r1() - delta.abs()
    }

    /// `sum_j |c_j / omega_j|^2`, the mean boson number of either dressed
    /// ground state.
    pub fn dressing_number(&self) -> f64 {
        self.omegas
            .iter()
            .zip(&self.couplings)
            .map(|(w, c)| c.norm_sqr() / (w * w))
            .sum()
    }

    pub fn field(&self) -> Field {
        Field::Discrete(self.clone())
    }
}

/// Reduces a continuum coupling to `m` modes.
pub fn discretize(c: &CouplingFunction, m: usize, strategy: Strategy) -> Result<DiscreteModes> {
    if m == 0 {
        return Err(Error::Domain("need at least one mode".into()));
    }
    let k_max = strategy.k_max();
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::Domain(format!("k_max must be positive, got {k_max}")));
    }
    let (dom_lo, dom_hi) = c.profile.domain();
    let s = sphere_area(c.dim());
    let n = c.dim() as i32;
    let radial = |k: f64| s * k.powi(n - 1) * c.weight(k);

    let quad = QuadratureConfig::default();
    let tail_mass = if c.lambda == 0.0 || k_max >= dom_hi {
        0.0
    } else {
        let tail = quad
            .integrate(radial, k_max, Upper::Infinite, &c.profile.breakpoints())
            .map_err(|_| Error::Domain(format!("R_0 tail beyond k_max = {k_max} does not converge")))?
            .value;
        let head = quad
            .integrate(radial, 0.0, Upper::Finite(k_max), &c.profile.breakpoints())
            .map_err(|_| Error::Domain(format!("R_0 below k_max = {k_max} does not converge")))?
            .value;
        if head + tail > 0.0 {
            tail / (head + tail)
        } else {
            0.0
        }
    };
    if tail_mass > TAIL_MASS_LIMIT {
        return Err(Error::Domain(format!(
            "k_max = {k_max} leaves a relative R_0 tail of {tail_mass:.3e} (limit {TAIL_MASS_LIMIT:e})"
        )));
    }

    let (momenta, weights) = match strategy {
        Strategy::LinearGrid { .. } => {
            let h = k_max / m as f64;
            ((0..m).map(|j| (j as f64 + 0.5) * h).collect(), vec![h; m])
        }
        Strategy::GaussPanels { .. } => {
            let panels = m.div_ceil(PANEL_NODES);
            let width = k_max / panels as f64;
            let mut ks = Vec::with_capacity(m);
            let mut ws = Vec::with_capacity(m);
            for p in 0..panels {
                let nodes = m / panels + usize::from(p < m % panels);
                let (x, w) = gauss_legendre(nodes);
                let a = p as f64 * width;
                for (xi, wi) in x.iter().zip(&w) {
                    ks.push(a + 0.5 * width * (xi + 1.0));
                    ws.push(0.5 * width * wi);
                }
            }
            (ks, ws)
        }
    };
    if momenta.iter().any(|&k| k < dom_lo) {
        return Err(Error::Domain(format!(
            "grid reaches below the tabulated profile's first sample k = {dom_lo}"
        )));
    }

    let omegas: Vec<f64> = momenta.iter().map(|&k| c.omega(k)).collect();
    let couplings: Vec<Complex64> = momenta
        .iter()
        .zip(&weights)
        .map(|(&k, &w)| Complex64::new(c.amplitude(k) * (s * k.powi(n - 1) * w).sqrt(), 0.0))
        .collect();
    if couplings.iter().any(|z| !z.re.is_finite()) {
        return Err(Error::Domain("coupling is singular on the grid".into()));
    }

    let continuum = match r_integral(c, 1, Region::Full, &DiagnosticSettings::default()) {
        Ok(v) => match v {
            crate::diagnostics::IntegralVerdict::Finite { value, error_estimate } => {
                Some((value, error_estimate, tail_mass))
            }
            _ => None,
        },
        Err(_) => None,
    };
    let mut modes = DiscreteModes::assemble(omegas, couplings, momenta, weights, Some(strategy), continuum)?;
    if continuum.is_none() {
        modes.meta.tail_mass = Some(tail_mass);
    }
    Ok(modes)
}
