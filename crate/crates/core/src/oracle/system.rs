use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linalg::{dense_eigen, lanczos_lowest, DenseSpectrum, LanczosSettings, SparseMatrix, C};
use super::modes::DiscreteModes;
use crate::error::{Error, Result};
use crate::qubit::Branch;

pub const DEFAULT_BUDGET: usize = 200_000;
/// Largest block decomposed densely.
pub const DENSE_LIMIT: usize = 4096;
/// Largest block whose ground state comes from a full decomposition; above
/// this only the lowest pairs are computed, by Lanczos.
pub const DENSE_GROUND_LIMIT: usize = 1600;

const ZERO: C = C::new(0.0, 0.0);

/// Occupation-cutoff policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmaxPolicy {
    Fixed(usize),
    /// Start at `ceil(4 max|c/omega|^2 + 10)` (or `start`) and double until
    /// `|E(n) - E(n/2)| < tol`.
    Auto {
        start: Option<usize>,
        tol: f64,
        max_doublings: usize,
    },
}

impl Default for NmaxPolicy {
    fn default() -> Self {
        NmaxPolicy::Auto {
            start: None,
            tol: 1e-10,
            max_doublings: 4,
        }
    }
}

/// Truncated qubit-field system.
///
/// Basis order: qubit slowest (`|up>`, `|down>`), then modes by ascending
/// frequency, each occupation `0..=n_max`, little-endian.
#[derive(Debug, Clone)]
pub struct OracleSystem {
    pub modes: DiscreteModes,
    pub n_max: usize,
    pub delta: f64,
    pub budget: usize,
    pub hamiltonian: SparseMatrix,
    /// Field-only blocks `H_+-` of the sigma^x branches.
    pub blocks: [SparseMatrix; 2],
    /// `(n_max, ground energy)` for every cutoff tried.
    pub convergence: Vec<(usize, f64)>,
}

fn field_dim(m: usize, levels: usize) -> Option<usize> {
    levels.checked_pow(m as u32)
}

impl OracleSystem {
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn field_dim(&self) -> usize {
        self.hamiltonian.dim() / 2
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Occupations of field basis state `f`.
    pub fn occupations(&self, mut f: usize) -> Vec<usize> {
        let l = self.levels();
        (0..self.modes.len())
            .map(|_| {
                let n = f % l;
                f /= l;
                n
            })
            .collect()
    }

    /// Full z-basis vector from the two branch components.
    pub fn join(&self, plus: &[C], minus: &[C]) -> Vec<C> {
        let h = FRAC_1_SQRT_2;
        let d = self.field_dim();
        let mut out = vec![ZERO; 2 * d];
        for i in 0..d {
            out[i] = (plus[i] + minus[i]) * h;
            out[d + i] = (plus[i] - minus[i]) * h;
        }
        out
    }

    /// Branch components `(psi_+, psi_-)` of a z-basis vector.
    pub fn split(&self, psi: &[C]) -> [Vec<C>; 2] {
        let h = FRAC_1_SQRT_2;
        let d = self.field_dim();
        let plus = (0..d).map(|i| (psi[i] + psi[d + i]) * h).collect();
        let minus = (0..d).map(|i| (psi[i] - psi[d + i]) * h).collect();
        [plus, minus]
    }

    /// `qubit (x) vacuum` for z-basis amplitudes.
    pub fn product_with_vacuum(&self, qubit: [Complex64; 2]) -> Vec<C> {
        let d = self.field_dim();
        let mut out = vec![ZERO; 2 * d];
        out[0] = qubit[0];
        out[d] = qubit[1];
        out
    }
}

/// Assembles `H = sum w a^dag a + Delta sigma^x + sigma^x (x) sum (c* a + c a^dag)`.
pub fn build_hamiltonian(modes: &DiscreteModes, delta: f64, n_max: usize) -> Result<OracleSystem> {
    build_with_budget(modes, delta, n_max, DEFAULT_BUDGET)
}

pub fn build_with_budget(modes: &DiscreteModes, delta: f64, n_max: usize, budget: usize) -> Result<OracleSystem> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be >= 1".into()));
    }
    if !delta.is_finite() {
        return Err(Error::Domain("Delta must be finite".into()));
    }
    let levels = n_max + 1;
    let m = modes.len();
    let d = field_dim(m, levels).filter(|d| d.checked_mul(2).is_some_and(|t| t <= budget));
    let Some(d) = d else {
        let dimension = field_dim(m, levels).and_then(|d| d.checked_mul(2)).unwrap_or(usize::MAX);
        return Err(Error::Budget { dimension, budget });
    };

    let strides: Vec<usize> = (0..m).map(|j| levels.pow(j as u32)).collect();
    let mut rows: Vec<Vec<(usize, C)>> = Vec::with_capacity(2 * d);
    for q in 0..2 {
        let other = (1 - q) * d;
        for f in 0..d {
            let mut row = Vec::with_capacity(2 * m + 2);
            let mut energy = 0.0;
            let mut rest = f;
            for j in 0..m {
                let n = rest % levels;
                rest /= levels;
                energy += modes.omegas[j] * n as f64;
                let c = modes.couplings[j];
                // <n| c* a |n+1> and <n| c a^dag |n-1>.
                if n + 1 < levels {
                    row.push((other + f + strides[j], c.conj() * ((n + 1) as f64).sqrt()));
                }
                if n > 0 {
                    row.push((other + f - strides[j], c * (n as f64).sqrt()));
                }
            }
            row.push((q * d + f, C::new(energy, 0.0)));
            row.push((other + f, C::new(delta, 0.0)));
            rows.push(row);
        }
    }
    let hamiltonian = SparseMatrix::from_rows(rows);
    let scale = hamiltonian.max_abs().max(1.0);
    let defect = hamiltonian.hermitian_defect();
    if defect > 1e-13 * scale {
        return Err(Error::Internal(format!("hamiltonian not Hermitian: defect {defect:e}")));
    }
    let blocks = branch_blocks(&hamiltonian, d, scale)?;
    Ok(OracleSystem {
        modes: modes.clone(),
        n_max,
        delta,
        budget,
        hamiltonian,
        blocks,
        convergence: Vec::new(),
    })
}

/// Conjugates by the qubit Hadamard and checks that the sigma^x branches
/// decouple.
fn branch_blocks(h: &SparseMatrix, d: usize, scale: f64) -> Result<[SparseMatrix; 2]> {
    let u = |b: usize, q: usize| if q == 1 && b == 1 { -1.0 } else { 1.0 };
    let mut blocks: [Vec<Vec<(usize, C)>>; 2] = [vec![Vec::new(); d], vec![Vec::new(); d]];
    let mut cross: Vec<Vec<(usize, C)>> = vec![Vec::new(); d];
    for r in 0..2 * d {
        let (q, i) = (r / d, r % d);
        for &(c, v) in h.row(r) {
            let (qq, j) = (c / d, c % d);
            for b in 0..2 {
                blocks[b][i].push((j, v * (0.5 * u(b, q) * u(b, qq))));
            }
            cross[i].push((j, v * (0.5 * u(0, q) * u(1, qq))));
        }
    }
    let cross = SparseMatrix::from_rows(cross);
    let leak = cross.max_abs();
    if leak > 1e-13 * scale {
        return Err(Error::Internal(format!("sigma^x branches couple: {leak:e}")));
    }
    let [p, m] = blocks;
    Ok([SparseMatrix::from_rows(p), SparseMatrix::from_rows(m)])
}

/// Lowest eigenpairs of one branch block.
#[derive(Debug, Clone)]
pub struct BranchGround {
    pub energies: Vec<f64>,
    pub state: Vec<C>,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Normalised z-basis vector.
    pub state: Vec<C>,
    pub branch: Branch,
    /// Lowest block energies and field vectors, indexed by branch.
    pub branches: [BranchGround; 2],
    /// `E_1 - E_0` over the whole spectrum.
    pub gap: f64,
    pub dense: bool,
    /// Full block spectra when both blocks were solved densely.
    pub(crate) spectra: Option<Box<[DenseSpectrum; 2]>>,
}

fn block_lowest(block: &SparseMatrix) -> Result<(BranchGround, Option<DenseSpectrum>)> {
    if block.dim() <= DENSE_GROUND_LIMIT {
        let spec = dense_eigen(&block.to_dense())?;
        let k = spec.energies.len().min(2);
        Ok((
            BranchGround {
                energies: spec.energies[..k].to_vec(),
                state: spec.vector(0),
            },
            Some(spec),
        ))
    } else {
        let lz = lanczos_lowest(block, 2, &LanczosSettings::default())?;
        Ok((
            BranchGround {
                energies: lz.energies,
                state: lz.vectors.into_iter().next().expect("one vector"),
            },
            None,
        ))
    }
}

pub fn ground_state(system: &OracleSystem) -> Result<GroundState> {
    let (plus, dense_p) = block_lowest(&system.blocks[0])?;
    let (minus, dense_m) = block_lowest(&system.blocks[1])?;
    let branch = if minus.energies[0] <= plus.energies[0] {
        Branch::Minus
    } else {
        Branch::Plus
    };
    let mut all: Vec<f64> = plus.energies.iter().chain(&minus.energies).copied().collect();
    all.sort_by(f64::total_cmp);
    let zero = vec![ZERO; system.field_dim()];
    let state = match branch {
        Branch::Plus => system.join(&plus.state, &zero),
        Branch::Minus => system.join(&zero, &minus.state),
    };
    Ok(GroundState {
        energy: all[0],
        state,
        branch,
        gap: all.get(1).map(|e| e - all[0]).unwrap_or(f64::INFINITY),
        branches: [plus, minus],
        dense: dense_p.is_some() && dense_m.is_some(),
        spectra: dense_p.zip(dense_m).map(|(p, m)| Box::new([p, m])),
    })
}

/// Chooses `n_max` by `policy` and returns the system with its convergence
/// table filled in.
pub fn converged_system(modes: &DiscreteModes, delta: f64, policy: NmaxPolicy) -> Result<(OracleSystem, GroundState)> {
    converged_with_budget(modes, delta, policy, DEFAULT_BUDGET)
}

pub fn default_start(modes: &DiscreteModes) -> usize {
    let alpha = modes
        .omegas
        .iter()
        .zip(&modes.couplings)
        .map(|(w, c)| c.norm_sqr() / (w * w))
        .fold(0.0, f64::max);
    (4.0 * alpha + 10.0).ceil() as usize
}

pub fn converged_with_budget(
    modes: &DiscreteModes,
    delta: f64,
    policy: NmaxPolicy,
    budget: usize,
) -> Result<(OracleSystem, GroundState)> {
    match policy {
        NmaxPolicy::Fixed(n) => {
            let mut sys = build_with_budget(modes, delta, n, budget)?;
            let g = ground_state(&sys)?;
            sys.convergence.push((n, g.energy));
            Ok((sys, g))
        }
        NmaxPolicy::Auto {
            start,
            tol,
            max_doublings,
        } => {
            let mut n = start.unwrap_or_else(|| default_start(modes)).max(2);
            let half = build_with_budget(modes, delta, n.div_ceil(2), budget)?;
            let mut table = vec![(half.n_max, ground_state(&half)?.energy)];
            for _ in 0..=max_doublings {
                let mut sys = build_with_budget(modes, delta, n, budget)?;
                let g = ground_state(&sys)?;
                let prev = table.last().expect("non-empty").1;
                table.push((n, g.energy));
                if (g.energy - prev).abs() < tol {
                    sys.convergence = table;
                    return Ok((sys, g));
                }
                n *= 2;
            }
            Err(Error::NotConverged(table))
        }
    }
}

/// Dense eigendecompositions of both branch blocks, for exact propagation
/// and Gibbs states.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub spectra: [DenseSpectrum; 2],
    field_dim: usize,
}

impl Propagator {
    pub fn new(system: &OracleSystem) -> Result<Self> {
        let d = system.field_dim();
        if d > DENSE_LIMIT {
            return Err(Error::Budget {
                dimension: d,
                budget: DENSE_LIMIT,
            });
        }
        Ok(Self {
            spectra: [
                dense_eigen(&system.blocks[0].to_dense())?,
                dense_eigen(&system.blocks[1].to_dense())?,
            ],
            field_dim: d,
        })
    }

    /// Reuses the spectra of a dense ground-state solve of the same system.
    pub fn from_ground(system: &OracleSystem, ground: &GroundState) -> Result<Self> {
        match &ground.spectra {
            Some(s) if s[0].energies.len() == system.field_dim() => Ok(Self {
                spectra: (**s).clone(),
                field_dim: system.field_dim(),
            }),
            _ => Self::new(system),
        }
    }

    /// `e^{-iHt} psi` for a z-basis vector.
    pub fn evolve(&self, system: &OracleSystem, psi: &[C], t: f64) -> Result<Vec<C>> {
        if psi.len() != 2 * self.field_dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.field_dim,
                got: psi.len(),
            });
        }
        if t == 0.0 {
            return Ok(psi.to_vec());
        }
        let parts = system.split(psi);
        let evolved: Vec<Vec<C>> = parts
            .iter()
            .zip(&self.spectra)
            .map(|(part, spec)| {
                let mut c = spec.project(part);
                for (ck, e) in c.iter_mut().zip(&spec.energies) {
                    *ck *= C::from_polar(1.0, -e * t);
                }
                spec.expand(&c)
            })
            .collect();
        Ok(system.join(&evolved[0], &evolved[1]))
    }

    /// Boltzmann weights of every eigenstate at inverse temperature `beta`,
    /// normalised over both branches.
    pub fn gibbs_weights(&self, beta: f64) -> [Vec<f64>; 2] {
        let e0 = self.spectra[0].energies[0].min(self.spectra[1].energies[0]);
        let mut w: [Vec<f64>; 2] = [0, 1].map(|b| {
            self.spectra[b]
                .energies
                .iter()
                .map(|e| (-beta * (e - e0)).exp())
                .collect::<Vec<f64>>()
        });
        let z: f64 = w.iter().flatten().sum();
        for v in &mut w {
            v.iter_mut().for_each(|x| *x /= z);
        }
        w
    }
}
