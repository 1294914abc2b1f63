//! KMS states of the branch Hamiltonians and the joint thermal state.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::End;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::modespace::{sphere_area, TestFunction};
use crate::powerlaw::{infrared_exponent, FitSettings};
use crate::qubit::{Branch, QubitState};
use crate::quadrature::QuadratureConfig;

type C = Complex64;

/// Exponents at or below this are treated as non-integrable at `k -> 0`.
const IR_MARGIN: f64 = 0.02;

pub fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("beta must be positive and finite, got {beta}")))
    }
}

/// `K(omega) = coth(beta omega / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalKernel {
    beta: f64,
}

impl ThermalKernel {
    pub fn new(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return f64::INFINITY;
        }
        1.0 / (0.5 * self.beta * omega).tanh()
    }
}

/// Bose-Einstein occupation `1 / (e^{beta omega} - 1)`.
pub fn planck_density(beta: f64, omega: f64) -> Result<f64> {
    check_beta(beta)?;
    if omega == 0.0 {
        return Err(Error::SingularPoint {
            k: 0.0,
            what: "Planck density at omega = 0",
        });
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// Fails when a pairing of `g` against the massless continuum diverges at
/// `k -> 0`. `density(mode)` is the modulus of the pairing integrand per
/// unit `d^n k`.
fn check_ir_pairing(
    field: &Field,
    name: &str,
    density: impl Fn(&crate::field::Mode) -> f64,
    quad: &QuadratureConfig,
) -> Result<()> {
    let Field::Continuum(c) = field else { return Ok(()) };
    if !c.mode_space.dispersion.is_massless() {
        return Ok(());
    }
    let s = sphere_area(c.dim());
    let n = c.dim() as i32;
    let (lo, _) = c.profile.domain();
    let start = c.profile.effective_support().map_or(1.0, |r| r.min(1.0));
    let radial = |k: f64| s * k.powi(n - 1) * density(&field.mode_at(k));
    // A pairing that is not a clean power law near zero is left to the
    // quadrature, which reports its own failure.
    if let Ok(fit) = infrared_exponent(radial, start, lo, &FitSettings::default(), quad) {
        if fit.exponent <= -1.0 + IR_MARGIN {
            return Err(Error::Divergent {
                pairing: name.to_string(),
                end: End::IR,
                exponent: fit.exponent,
            });
        }
    }
    Ok(())
}

/// `<g, coth(beta omega / 2) g>`.
pub fn coth_pairing(field: &Field, beta: f64, g: &TestFunction, quad: &QuadratureConfig) -> Result<f64> {
    let kernel = ThermalKernel::new(beta)?;
    field.check(g)?;
    if g.is_zero() {
        return Ok(0.0);
    }
    let name = format!("<{0}, coth(beta omega/2) {0}>", g.label());
    check_ir_pairing(field, &name, |m| g.at(m).norm_sqr() * kernel.eval(m.omega), quad)?;
    Ok(field.kernel_inner(g, g, |w| kernel.eval(w), &name, quad)?.re)
}

/// `Re <lambda F / omega, g>`, the displacement pairing of the dressed states.
pub fn displacement_pairing(field: &Field, g: &TestFunction, quad: &QuadratureConfig) -> Result<f64> {
    field.check(g)?;
    if g.is_zero() {
        return Ok(0.0);
    }
    let name = format!("<lambda F / omega, {}>", g.label());
    check_ir_pairing(field, &name, |m| (m.coupling.norm() * g.at(m).norm()) / m.omega, quad)?;
    let alpha = field.mode_function("lambda F / omega", field.coupling_support(), |m| {
        if m.omega == 0.0 {
            C::new(0.0, 0.0)
        } else {
            m.coupling / m.omega
        }
    });
    Ok(field.inner(&alpha, g, 0.0, quad).map_err(|e| match e {
        Error::Quadrature { value, error, panels, .. } => Error::Quadrature {
            what: name.clone(),
            value,
            error,
            panels,
        },
        other => other,
    })?.re)
}

/// Dressed-state phase `exp(+-2i Im<i lambda F / omega, g>)`.
fn branch_phase(field: &Field, branch: Branch, g: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
    let re = displacement_pairing(field, g, quad)?;
    Ok(C::from_polar(1.0, -2.0 * branch.sign() * re))
}

/// `<W(g)>` in the KMS state of branch `branch` at inverse temperature `beta`.
pub fn kms_weyl(field: &Field, beta: f64, branch: Branch, g: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
    check_beta(beta)?;
    if g.is_zero() {
        return Ok(C::new(1.0, 0.0));
    }
    let k = coth_pairing(field, beta, g, quad)?;
    Ok((-0.5 * k).exp() * branch_phase(field, branch, g, quad)?)
}

/// `<W(g)>` in the ground state of branch `branch`.
pub fn ground_weyl(field: &Field, branch: Branch, g: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
    if g.is_zero() {
        return Ok(C::new(1.0, 0.0));
    }
    let n = field.norm_sqr(g, quad)?;
    Ok((-0.5 * n).exp() * branch_phase(field, branch, g, quad)?)
}

/// Weights of the two sigma^x branches in the joint thermal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalWeights {
    pub plus: f64,
    pub minus: f64,
}

impl ThermalWeights {
    pub fn of(&self, b: Branch) -> f64 {
        match b {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }

    /// Weight of the branch that is the ground state for this `Delta`, then
    /// the other one.
    pub fn ground_first(&self, delta: f64) -> (f64, f64) {
        let g = Branch::ground_for(delta);
        (self.of(g), self.of(g.flip()))
    }

    /// Qubit marginal, diagonal in the sigma^x basis.
    pub fn qubit_marginal(&self) -> QubitState {
        let z = C::new(0.0, 0.0);
        QubitState::from_x_basis([[C::new(self.plus, 0.0), z], [z, C::new(self.minus, 0.0)]])
            .expect("weights form a density matrix")
    }
}

/// Gibbs weights of `Delta sigma^x` at inverse temperature `beta`.
pub fn joint_thermal(beta: f64, delta: f64) -> Result<ThermalWeights> {
    check_beta(beta)?;
    if !delta.is_finite() {
        return Err(Error::Domain(format!("Delta must be finite, got {delta}")));
    }
    let x = 2.0 * beta * delta;
    Ok(ThermalWeights {
        plus: 1.0 / (1.0 + x.exp()),
        minus: 1.0 / (1.0 + (-x).exp()),
    })
}

/// `<W(g)>` in the joint thermal state.
pub fn joint_thermal_weyl(field: &Field, beta: f64, delta: f64, g: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
    let w = joint_thermal(beta, delta)?;
    let mut acc = C::new(0.0, 0.0);
    for b in Branch::BOTH {
        if w.of(b) > 0.0 {
            acc += w.of(b) * kms_weyl(field, beta, b, g, quad)?;
        }
    }
    Ok(acc)
}

/// `<W(g)>` in the zero-temperature limit of the joint state.
pub fn joint_ground_weyl(field: &Field, delta: f64, g: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
    if delta == 0.0 {
        let p = ground_weyl(field, Branch::Plus, g, quad)?;
        let m = ground_weyl(field, Branch::Minus, g, quad)?;
        Ok(0.5 * (p + m))
    } else {
        ground_weyl(field, Branch::ground_for(delta), g, quad)
    }
}

/// KMS values at `beta`, `2 beta`, `4 beta` against the ground formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroTemperatureLimit {
    pub betas: [f64; 3],
    #[serde(skip)]
    pub values: [C; 3],
    #[serde(skip)]
    pub ground: C,
    /// Largest spread among the three values.
    pub spread: f64,
    /// Distance of the `4 beta` value to the ground formula.
    pub distance: f64,
    pub converged: bool,
}

pub fn zero_temperature_limit(
    field: &Field,
    beta: f64,
    branch: Branch,
    g: &TestFunction,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<ZeroTemperatureLimit> {
    let betas = [beta, 2.0 * beta, 4.0 * beta];
    let mut values = [C::new(0.0, 0.0); 3];
    for (v, b) in values.iter_mut().zip(betas) {
        *v = kms_weyl(field, b, branch, g, quad)?;
    }
    let ground = ground_weyl(field, branch, g, quad)?;
    let spread = (values[0] - values[1]).norm().max((values[1] - values[2]).norm());
    let distance = (values[2] - ground).norm();
    Ok(ZeroTemperatureLimit {
        betas,
        values,
        ground,
        spread,
        distance,
        converged: spread < tol && distance < tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalRow {
    pub beta: f64,
    pub weight_plus: f64,
    pub weight_minus: f64,
    pub re: f64,
    pub im: f64,
    /// Set on the largest `beta` when it matches the ground formula.
    pub ground_converged: Option<bool>,
}

/// Joint thermal `<W(g)>` over a grid of `beta`.
pub fn beta_sweep(
    field: &Field,
    betas: &[f64],
    delta: f64,
    g: &TestFunction,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<ThermalRow>> {
    if betas.is_empty() {
        return Err(Error::Domain("beta grid is empty".into()));
    }
    for &b in betas {
        check_beta(b)?;
    }
    let top = betas.iter().copied().fold(f64::MIN, f64::max);
    let ground = joint_ground_weyl(field, delta, g, quad)?;
    let mut rows = Vec::with_capacity(betas.len());
    let mut flagged = false;
    for &beta in betas {
        let w = joint_thermal(beta, delta)?;
        let v = joint_thermal_weyl(field, beta, delta, g, quad)?;
        let ground_converged = if beta == top && !flagged {
            flagged = true;
            Some((v - ground).norm() < tol)
        } else {
            None
        };
        rows.push(ThermalRow {
            beta,
            weight_plus: w.plus,
            weight_minus: w.minus,
            re: v.re,
            im: v.im,
            ground_converged,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[ThermalRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "weight_plus", "weight_minus", "re", "im", "ground_converged"])?;
    for r in rows {
        w.write_record([
            r.beta.to_string(),
            r.weight_plus.to_string(),
            r.weight_minus.to_string(),
            r.re.to_string(),
            r.im.to_string(),
            r.ground_converged.map_or(String::new(), |b| b.to_string()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
