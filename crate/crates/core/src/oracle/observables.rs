use faer::Mat;
use num_complex::Complex64;

use super::linalg::{dense_eigen, norm, C};
use super::system::{OracleSystem, Propagator};
use crate::error::{Error, Result};
use crate::qubit::{pauli_z_basis, Axis, Branch, Matrix2};

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `W(g) = exp(i phi(g))` on the field, one amplitude per mode.
    WeylDisplacement(Vec<Complex64>),
    SigmaAxis(Axis),
    NumberTotal,
    QubitReduced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    Scalar(Complex64),
    /// Reduced qubit density matrix in the computational basis.
    Matrix(Matrix2),
}

impl Expectation {
    pub fn scalar(self) -> Option<Complex64> {
        match self {
            Expectation::Scalar(z) => Some(z),
            Expectation::Matrix(_) => None,
        }
    }

    pub fn matrix(self) -> Option<Matrix2> {
        match self {
            Expectation::Matrix(m) => Some(m),
            Expectation::Scalar(_) => None,
        }
    }
}

/// `exp(i (g a^dag + conj(g) a))` on `levels` oscillator levels.
pub fn mode_weyl(g: Complex64, levels: usize) -> Result<Mat<C>> {
    let mut x = Mat::<C>::zeros(levels, levels);
    for n in 0..levels - 1 {
        let s = ((n + 1) as f64).sqrt();
        x[(n + 1, n)] = g * s;
        x[(n, n + 1)] = g.conj() * s;
    }
    let spec = dense_eigen(&x)?;
    let mut w = Mat::<C>::zeros(levels, levels);
    for k in 0..levels {
        let phase = C::from_polar(1.0, spec.energies[k]);
        for i in 0..levels {
            let a = spec.vectors[(i, k)] * phase;
            for j in 0..levels {
                w[(i, j)] += a * spec.vectors[(j, k)].conj();
            }
        }
    }
    Ok(w)
}

/// Applies a single-mode operator to mode `j` of a field vector.
pub fn apply_mode_operator(psi: &mut [C], op: &Mat<C>, j: usize, levels: usize) {
    let stride = levels.pow(j as u32);
    let block = stride * levels;
    let mut col = vec![ZERO; levels];
    for start in (0..psi.len()).step_by(block) {
        for inner in 0..stride {
            for (n, c) in col.iter_mut().enumerate() {
                *c = psi[start + n * stride + inner];
            }
            for n in 0..levels {
                let mut acc = ZERO;
                for (m, c) in col.iter().enumerate() {
                    acc += op[(n, m)] * c;
                }
                psi[start + n * stride + inner] = acc;
            }
        }
    }
}

/// `W(g)` applied to a field-only vector.
pub fn apply_weyl_field(system: &OracleSystem, g: &[Complex64], psi: &[C]) -> Result<Vec<C>> {
    if g.len() != system.modes.len() {
        return Err(Error::DimensionMismatch {
            expected: system.modes.len(),
            got: g.len(),
        });
    }
    let mut out = psi.to_vec();
    for (j, gj) in g.iter().enumerate() {
        if gj.norm() == 0.0 {
            continue;
        }
        let w = mode_weyl(*gj, system.levels())?;
        apply_mode_operator(&mut out, &w, j, system.levels());
    }
    Ok(out)
}

/// Per-mode occupation mean and standard deviation of a field-resolved
/// state, summed over the qubit.
pub fn occupation_stats(system: &OracleSystem, psi: &[C]) -> Vec<(f64, f64)> {
    let d = system.field_dim();
    let m = system.modes.len();
    let mut first = vec![0.0; m];
    let mut second = vec![0.0; m];
    for (idx, z) in psi.iter().enumerate() {
        let p = z.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (j, n) in system.occupations(idx % d).into_iter().enumerate() {
            first[j] += p * n as f64;
            second[j] += p * (n * n) as f64;
        }
    }
    first
        .into_iter()
        .zip(second)
        .map(|(a, b)| (a, (b - a * a).max(0.0).sqrt()))
        .collect()
}

/// Requires `<n_j> + 5 sigma_j < n_max` for every mode.
pub fn check_truncation(system: &OracleSystem, stats: &[(f64, f64)]) -> Result<()> {
    for (j, (mean, sd)) in stats.iter().enumerate() {
        if mean + 5.0 * sd >= system.n_max as f64 {
            return Err(Error::Truncation(format!(
                "mode {j} (omega = {}): <n> = {mean:.4}, sd = {sd:.4}, <n> + 5 sd >= n_max = {}",
                system.modes.omegas[j], system.n_max
            )));
        }
    }
    Ok(())
}

/// Expectation in a pure z-basis state.
pub fn expectation(system: &OracleSystem, psi: &[C], obs: &Observable) -> Result<Expectation> {
    let d = system.field_dim();
    if psi.len() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            got: psi.len(),
        });
    }
    let nrm = norm(psi);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("state is not normalised: |psi| = {nrm}")));
    }
    check_truncation(system, &occupation_stats(system, psi))?;
    let (up, down) = psi.split_at(d);
    let dot = |a: &[C], b: &[C]| a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y);
    Ok(match obs {
        Observable::WeylDisplacement(g) => {
            let wu = apply_weyl_field(system, g, up)?;
            let wd = apply_weyl_field(system, g, down)?;
            Expectation::Scalar(dot(up, &wu) + dot(down, &wd))
        }
        Observable::SigmaAxis(axis) => {
            let p = pauli_z_basis(*axis);
            let v = p[0][0] * dot(up, up) + p[0][1] * dot(up, down) + p[1][0] * dot(down, up) + p[1][1] * dot(down, down);
            Expectation::Scalar(v)
        }
        Observable::NumberTotal => {
            let total: f64 = occupation_stats(system, psi).iter().map(|s| s.0).sum();
            Expectation::Scalar(C::new(total, 0.0))
        }
        Observable::QubitReduced => {
            // rho_{qq'} = sum_f psi_{q f} conj(psi_{q' f}).
            Expectation::Matrix([[dot(up, up), dot(down, up)], [dot(up, down), dot(down, down)]])
        }
    })
}

/// Gibbs expectation of a field Weyl operator over the truncated spectrum,
/// restricted to one sigma^x branch or over both.
pub fn gibbs_weyl(
    system: &OracleSystem,
    propagator: &Propagator,
    beta: f64,
    branch: Option<Branch>,
    g: &[Complex64],
) -> Result<Complex64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let weights = propagator.gibbs_weights(beta);
    let branches: Vec<usize> = match branch {
        Some(b) => vec![b.index()],
        None => vec![0, 1],
    };
    let z: f64 = branches.iter().map(|&b| weights[b].iter().sum::<f64>()).sum();
    let m = system.modes.len();
    let mut mean = vec![0.0; m];
    let mut second = vec![0.0; m];
    let mut acc = ZERO;
    for &b in &branches {
        let spec = &propagator.spectra[b];
        for (k, w) in weights[b].iter().enumerate() {
            let p = w / z;
            if p < 1e-300 {
                continue;
            }
            let v = spec.vector(k);
            let wv = apply_weyl_field(system, g, &v)?;
            acc += v.iter().zip(&wv).fold(ZERO, |s, (x, y)| s + x.conj() * y) * p;
            for (idx, amp) in v.iter().enumerate() {
                let q = amp.norm_sqr() * p;
                for (j, n) in system.occupations(idx).into_iter().enumerate() {
                    mean[j] += q * n as f64;
                    second[j] += q * (n * n) as f64;
                }
            }
        }
    }
    let stats: Vec<(f64, f64)> = mean
        .into_iter()
        .zip(second)
        .map(|(a, b)| (a, (b - a * a).max(0.0).sqrt()))
        .collect();
    check_truncation(system, &stats)?;
    Ok(acc)
}

/// Boltzmann weight of each sigma^x branch.
pub fn gibbs_branch_weights(propagator: &Propagator, beta: f64) -> [f64; 2] {
    let w = propagator.gibbs_weights(beta);
    [w[0].iter().sum(), w[1].iter().sum()]
}

/// Probability of `N` total bosons in a field-only vector.
pub fn number_distribution(system: &OracleSystem, field: &[C]) -> Vec<f64> {
    let max = system.n_max * system.modes.len();
    let mut p = vec![0.0; max + 1];
    for (idx, z) in field.iter().enumerate() {
        let n: usize = system.occupations(idx).iter().sum();
        p[n] += z.norm_sqr();
    }
    p
}
