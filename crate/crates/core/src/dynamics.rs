//! Exact Heisenberg dynamics of the gapless model.
//!
//! With `H = h + Delta sigma^x + sigma^x phi(lambda F)` each sigma^x branch
//! `s` evolves by a displaced free Hamiltonian, so an operator
//! `|s><s'| (x) W(f)` maps under `A -> e^{itH} A e^{-itH}` to
//!
//! ```text
//! e^{i(s-s') Delta t} e^{-i(s+s') Im<G, f>} |s><s'| (x) W((f + (s-s') G) e^{i omega t})
//! ```
//!
//! with `G = lambda F(t)`, `F_k(t) = -i F_k (1 - e^{-i omega t}) / omega`.
//! On the diagonal this is the familiar `W(f e^{i omega t}) e^{+-i phi(t)}`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{max_support, quad_error, Field, Hints};
use crate::modespace::{CouplingFunction, TestFunction};
use crate::qubit::{entropy, hadamard_conjugate, pauli_x_basis, Axis, Branch, Matrix2, QubitState};
use crate::quadrature::QuadratureConfig;
use crate::thermal;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Qubit parameters of a gapless run. The level splitting `Omega` is carried
/// only to be rejected when nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gapless {
    delta: f64,
}

impl Gapless {
    pub fn new(gap: f64, delta: f64) -> Result<Self> {
        if gap != 0.0 {
            return Err(Error::Unsupported(format!(
                "exact dynamics need Omega = 0, got {gap}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::Domain(format!("Delta must be finite, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn with_delta(delta: f64) -> Result<Self> {
        Self::new(0.0, delta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `F_k(t) / F_k = 2 e^{-i omega t/2} sin(omega t/2) / omega`.
#[inline]
pub fn amplitude_factor(omega: f64, t: f64) -> C {
    if omega == 0.0 {
        return C::new(t, 0.0);
    }
    let x = 0.5 * omega * t;
    C::from_polar(2.0 * x.sin() / omega, -x)
}

/// `F_k(t)` at unit coupling strength.
pub fn mode_amplitude(c: &CouplingFunction, k: f64, t: f64) -> Result<C> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("mode_amplitude needs k > 0, got {k}")));
    }
    Ok(c.unit_value(k)? * amplitude_factor(c.omega(k), t))
}

/// `lambda F(t)` as a test function.
pub fn dressed_amplitude(field: &Field, t: f64) -> TestFunction {
    field.mode_function(format!("lambda F({t})"), field.coupling_support(), move |m| {
        m.coupling * amplitude_factor(m.omega, t)
    })
}

/// `sin x - x` without cancellation.
fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() - x
    }
}

/// `Theta(t) = int d^n k lambda^2 |F_k|^2 (sin omega t - omega t) / omega^2`.
pub fn theta_phase(field: &Field, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let hints = Hints::support(field.coupling_support()).at_time(t);
    field
        .integrate(
            |m| {
                let w = m.coupling.norm_sqr();
                if w == 0.0 {
                    0.0
                } else if m.omega == 0.0 {
                    0.0
                } else {
                    w * sin_minus_x(m.omega * t) / (m.omega * m.omega)
                }
            },
            &hints,
            quad,
        )
        .map(|e| e.value)
        .map_err(quad_error(format!("Theta({t})")))
}

/// `N(t) = |lambda F(t)|^2`, the mean number of bosons emitted from the
/// vacuum by either branch.
pub fn mean_boson_number(field: &Field, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let hints = Hints::support(field.coupling_support()).at_time(t);
    field
        .integrate(|m| m.coupling.norm_sqr() * amplitude_factor(m.omega, t).norm_sqr(), &hints, quad)
        .map(|e| e.value)
        .map_err(quad_error(format!("N({t})")))
}

/// Decoherence exponent `Gamma(t) = 2 N(t)`.
pub fn decoherence(field: &Field, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(2.0 * mean_boson_number(field, t, quad)?)
}

/// `N(2T) - N(T)` for each horizon `T`. For a coupling with `R_2` divergent
/// logarithmically in the infrared these approach a constant.
pub fn dyadic_increments(field: &Field, horizons: &[f64], quad: &QuadratureConfig) -> Result<Vec<(f64, f64)>> {
    horizons
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("horizon must be positive, got {t}")));
            }
            Ok((t, mean_boson_number(field, 2.0 * t, quad)? - mean_boson_number(field, t, quad)?))
        })
        .collect()
}

/// `phi(t) = -Im <2 lambda F(t), g>`.
pub fn weyl_phase(field: &Field, g: &TestFunction, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    if t == 0.0 || g.is_zero() {
        return Ok(0.0);
    }
    let big_g = dressed_amplitude(field, t);
    Ok(-2.0 * field.inner(&big_g, g, t, quad)?.im)
}

/// `amplitude e^{i phase} W(argument)`.
#[derive(Debug, Clone)]
pub struct WeylEntry {
    pub amplitude: C,
    pub argument: TestFunction,
    pub phase: f64,
}

impl WeylEntry {
    pub fn coefficient(&self) -> C {
        self.amplitude * C::from_polar(1.0, self.phase)
    }
}

/// 2x2 array over the sigma^x branches `(+, -)`; `None` entries vanish.
#[derive(Debug, Clone)]
pub struct EvolvedWeylObservable {
    pub entries: [[Option<WeylEntry>; 2]; 2],
    pub label: String,
}

impl EvolvedWeylObservable {
    /// `1 (x) W(g)`.
    pub fn weyl(g: &TestFunction) -> Self {
        let e = || {
            Some(WeylEntry {
                amplitude: C::new(1.0, 0.0),
                argument: g.clone(),
                phase: 0.0,
            })
        };
        Self {
            entries: [[e(), None], [None, e()]],
            label: format!("W({})", g.label()),
        }
    }

    /// `m (x) 1` for a qubit matrix in the branch basis.
    pub fn qubit(field: &Field, m: &Matrix2, label: impl Into<String>) -> Self {
        let mut entries: [[Option<WeylEntry>; 2]; 2] = Default::default();
        for (a, row) in m.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if v.norm() > 1e-15 {
                    entries[a][b] = Some(WeylEntry {
                        amplitude: *v,
                        argument: field.zero_function(),
                        phase: 0.0,
                    });
                }
            }
        }
        Self {
            entries,
            label: label.into(),
        }
    }

    pub fn sigma(field: &Field, axis: Axis) -> Self {
        Self::qubit(field, &pauli_x_basis(axis), format!("sigma^{axis:?}").to_lowercase())
    }

    /// Conjugate transpose: amplitudes and phases conjugated, arguments negated.
    pub fn adjoint(&self, field: &Field) -> Result<Self> {
        let mut entries: [[Option<WeylEntry>; 2]; 2] = Default::default();
        for a in 0..2 {
            for b in 0..2 {
                if let Some(e) = &self.entries[b][a] {
                    entries[a][b] = Some(WeylEntry {
                        amplitude: e.amplitude.conj(),
                        argument: field.map(&e.argument, format!("-{}", e.argument.label()), e.argument.support(), |_, v| -v)?,
                        phase: -e.phase,
                    });
                }
            }
        }
        Ok(Self {
            entries,
            label: format!("({})^dagger", self.label),
        })
    }
}

/// Heisenberg evolution of a matrix-of-Weyl observable by time `t`.
pub fn evolve_observable(
    field: &Field,
    obs: &EvolvedWeylObservable,
    t: f64,
    model: &Gapless,
    quad: &QuadratureConfig,
) -> Result<EvolvedWeylObservable> {
    if t == 0.0 {
        return Ok(obs.clone());
    }
    let big_g = dressed_amplitude(field, t);
    let mut entries: [[Option<WeylEntry>; 2]; 2] = Default::default();
    for (a, row) in obs.entries.iter().enumerate() {
        for (b, entry) in row.iter().enumerate() {
            let Some(e) = entry else { continue };
            let s = Branch::from_index(a).sign();
            let sp = Branch::from_index(b).sign();
            let ds = s - sp;
            let mut phase = e.phase + ds * model.delta() * t;
            if s + sp != 0.0 && !e.argument.is_zero() {
                phase -= (s + sp) * field.inner(&big_g, &e.argument, t, quad)?.im;
            }
            let support = if ds == 0.0 {
                e.argument.support()
            } else {
                max_support(e.argument.support(), field.coupling_support())
            };
            let argument = if ds == 0.0 && e.argument.is_zero() {
                e.argument.clone()
            } else {
                field.map(&e.argument, format!("({} + {ds} G) e^(i w {t})", e.argument.label()), support, move |m, v| {
                    (v + m.coupling * amplitude_factor(m.omega, t) * ds) * C::from_polar(1.0, m.omega * t)
                })?
            };
            entries[a][b] = Some(WeylEntry {
                amplitude: e.amplitude,
                argument,
                phase,
            });
        }
    }
    Ok(EvolvedWeylObservable {
        entries,
        label: format!("alpha_{t}({})", obs.label),
    })
}

/// `alpha_t(W(g))`.
pub fn evolve_weyl(
    field: &Field,
    g: &TestFunction,
    t: f64,
    model: &Gapless,
    quad: &QuadratureConfig,
) -> Result<EvolvedWeylObservable> {
    field.check(g)?;
    evolve_observable(field, &EvolvedWeylObservable::weyl(g), t, model, quad)
}

/// `alpha_t(sigma^axis)`.
pub fn evolve_sigma(
    field: &Field,
    axis: Axis,
    t: f64,
    model: &Gapless,
    quad: &QuadratureConfig,
) -> Result<EvolvedWeylObservable> {
    evolve_observable(field, &EvolvedWeylObservable::sigma(field, axis), t, model, quad)
}

/// Joint detector-field states with quasifree field parts.
#[derive(Debug, Clone)]
pub enum StateSpec {
    /// Field vacuum; the qubit is tracial.
    Vacuum,
    /// Coherent field state `D(beta)|0>` with `beta` given; the qubit is tracial.
    Coherent(TestFunction),
    /// `|s><s|` times the KMS state of branch `s`.
    Kms { beta: f64, branch: Branch },
    /// `|s><s|` times the dressed vacuum of branch `s`.
    JointGround(Branch),
    /// Mixture of both branch KMS states with the Gibbs weights of `Delta sigma^x`.
    JointThermal { beta: f64, delta: f64 },
    /// Qubit state times a field state (`Vacuum`, `Coherent` or `Kms`).
    ProductInitial { qubit: QubitState, field: Box<StateSpec> },
}

/// Field part of a state component.
#[derive(Debug, Clone)]
enum FieldFunctional {
    Vacuum,
    Coherent(TestFunction),
    /// KMS (or, without `beta`, ground) state of branch `branch`.
    Branch { beta: Option<f64>, branch: Branch },
}

impl FieldFunctional {
    fn weyl(&self, field: &Field, h: &TestFunction, quad: &QuadratureConfig) -> Result<C> {
        if h.is_zero() {
            return Ok(C::new(1.0, 0.0));
        }
        match self {
            FieldFunctional::Vacuum => Ok(C::new((-0.5 * field.norm_sqr(h, quad)?).exp(), 0.0)),
            FieldFunctional::Coherent(beta) => {
                let n = field.norm_sqr(h, quad)?;
                let p = field.inner(beta, h, 0.0, quad)?;
                Ok(C::from_polar((-0.5 * n).exp(), 2.0 * p.re))
            }
            FieldFunctional::Branch { beta: Some(b), branch } => thermal::kms_weyl(field, *b, *branch, h, quad),
            FieldFunctional::Branch { beta: None, branch } => thermal::ground_weyl(field, *branch, h, quad),
        }
    }
}

fn components(state: &StateSpec) -> Result<Vec<(Matrix2, FieldFunctional)>> {
    let proj = |b: Branch| QubitState::branch(b).x_basis();
    let half = QubitState::tracial().x_basis();
    Ok(match state {
        StateSpec::Vacuum => vec![(half, FieldFunctional::Vacuum)],
        StateSpec::Coherent(beta) => vec![(half, FieldFunctional::Coherent(beta.clone()))],
        StateSpec::Kms { beta, branch } => {
            thermal::check_beta(*beta)?;
            vec![(
                proj(*branch),
                FieldFunctional::Branch {
                    beta: Some(*beta),
                    branch: *branch,
                },
            )]
        }
        StateSpec::JointGround(branch) => vec![(
            proj(*branch),
            FieldFunctional::Branch {
                beta: None,
                branch: *branch,
            },
        )],
        StateSpec::JointThermal { beta, delta } => {
            let w = thermal::joint_thermal(*beta, *delta)?;
            Branch::BOTH
                .iter()
                .map(|&b| {
                    let mut m = proj(b);
                    m[b.index()][b.index()] *= w.of(b);
                    (
                        m,
                        FieldFunctional::Branch {
                            beta: Some(*beta),
                            branch: b,
                        },
                    )
                })
                .collect()
        }
        StateSpec::ProductInitial { qubit, field } => {
            let f = match field.as_ref() {
                StateSpec::Vacuum => FieldFunctional::Vacuum,
                StateSpec::Coherent(beta) => FieldFunctional::Coherent(beta.clone()),
                StateSpec::Kms { beta, branch } => {
                    thermal::check_beta(*beta)?;
                    FieldFunctional::Branch {
                        beta: Some(*beta),
                        branch: *branch,
                    }
                }
                other => {
                    return Err(Error::Unsupported(format!(
                        "product state needs a field-only factor, got {other:?}"
                    )))
                }
            };
            vec![(qubit.x_basis(), f)]
        }
    })
}

/// `omega(obs)` for a joint state.
pub fn state_expectation(
    field: &Field,
    state: &StateSpec,
    obs: &EvolvedWeylObservable,
    quad: &QuadratureConfig,
) -> Result<C> {
    let mut total = ZERO;
    for (rho, functional) in components(state)? {
        for (a, row) in obs.entries.iter().enumerate() {
            for (b, entry) in row.iter().enumerate() {
                let Some(e) = entry else { continue };
                // Tr(rho |a><b|) = rho_ba.
                let weight = rho[b][a];
                if weight.norm() == 0.0 {
                    continue;
                }
                total += weight * e.coefficient() * functional.weyl(field, &e.argument, quad)?;
            }
        }
    }
    Ok(total)
}

/// Reduced detector state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedQubit {
    /// Branch basis `(+, -)`.
    #[serde(skip)]
    pub rho_x: Matrix2,
    #[serde(skip)]
    pub rho_z: Matrix2,
    pub entropy: f64,
}

/// `rho(t)` of a product initial state and its von Neumann entropy.
pub fn reduced_qubit(
    field: &Field,
    initial: &StateSpec,
    t: f64,
    model: &Gapless,
    quad: &QuadratureConfig,
) -> Result<ReducedQubit> {
    match initial {
        StateSpec::ProductInitial { .. } | StateSpec::Vacuum | StateSpec::Coherent(_) => {}
        other => {
            return Err(Error::Unsupported(format!(
                "reduced_qubit needs a product initial state, got {other:?}"
            )))
        }
    }
    let mut rho = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in a..2 {
            // rho_ab = omega(alpha_t(|b><a|)).
            let mut m = [[ZERO; 2]; 2];
            m[b][a] = C::new(1.0, 0.0);
            let obs = EvolvedWeylObservable::qubit(field, &m, "projector");
            let evolved = evolve_observable(field, &obs, t, model, quad)?;
            rho[a][b] = state_expectation(field, initial, &evolved, quad)?;
        }
    }
    rho[1][0] = rho[0][1].conj();
    rho[0][0].im = 0.0;
    rho[1][1].im = 0.0;
    Ok(ReducedQubit {
        rho_x: rho,
        rho_z: hadamard_conjugate(&rho),
        entropy: entropy(&rho),
    })
}

/// Sampled observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub observable: String,
    pub metadata: BTreeMap<String, String>,
    pub t: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Real-valued channel (written as `t, value`).
    pub real: bool,
}

impl TimeSeries {
    pub fn new(observable: impl Into<String>, real: bool) -> Self {
        Self {
            observable: observable.into(),
            metadata: BTreeMap::new(),
            t: Vec::new(),
            re: Vec::new(),
            im: Vec::new(),
            real,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, t: f64, value: C) -> Result<()> {
        if let Some(&last) = self.t.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("times must increase strictly: {t} after {last}")));
            }
        }
        self.t.push(t);
        self.re.push(value.re);
        self.im.push(value.im);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn value(&self, i: usize) -> C {
        C::new(self.re[i], self.im[i])
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.real {
            w.write_record(["t", "value"])?;
            for i in 0..self.len() {
                w.write_record([self.t[i].to_string(), self.re[i].to_string()])?;
            }
        } else {
            w.write_record(["t", "re", "im"])?;
            for i in 0..self.len() {
                w.write_record([self.t[i].to_string(), self.re[i].to_string(), self.im[i].to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Validates a sample grid.
pub fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("times must be finite".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("times must increase strictly".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::DiscreteModes;
    use std::f64::consts::PI;

    fn single(w: f64, c: f64) -> Field {
        DiscreteModes::real(&[w], &[c]).unwrap().field()
    }

    #[test]
    fn amplitude_factor_matches_definition() {
        for (w, t) in [(1.3, 0.7), (0.2, 11.0), (5.0, -2.0)] {
            let direct = C::new(0.0, -1.0) * (C::new(1.0, 0.0) - C::from_polar(1.0, -w * t)) / w;
            assert!((amplitude_factor(w, t) - direct).norm() < 1e-14);
        }
        assert!(amplitude_factor(2.0, PI).norm() < 1e-15);
    }

    #[test]
    fn single_mode_examples() {
        let q = QuadratureConfig::default();
        assert!((theta_phase(&single(1.0, 0.5), PI, &q).unwrap() + 0.25 * PI).abs() < 1e-14);
        assert!((mean_boson_number(&single(1.0, 0.3), PI, &q).unwrap() - 0.36).abs() < 1e-14);
    }

    #[test]
    fn gap_rejected() {
        assert!(matches!(Gapless::new(0.1, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sigma_x_is_conserved() {
        let f = DiscreteModes::real(&[1.0, 1.7], &[0.2, 0.1]).unwrap().field();
        let m = Gapless::with_delta(0.3).unwrap();
        let q = QuadratureConfig::default();
        let x = evolve_sigma(&f, Axis::X, 2.3, &m, &q).unwrap();
        let state = StateSpec::ProductInitial {
            qubit: QubitState::pure_z(C::new(0.8, 0.0), C::new(0.0, 0.6)).unwrap(),
            field: Box::new(StateSpec::Vacuum),
        };
        let v0 = state_expectation(&f, &state, &EvolvedWeylObservable::sigma(&f, Axis::X), &q).unwrap();
        let vt = state_expectation(&f, &state, &x, &q).unwrap();
        assert!((v0 - vt).norm() < 1e-14);
    }

    #[test]
    fn reduced_qubit_decay() {
        let f = DiscreteModes::real(&[1.0, 1.7], &[0.2, 0.1]).unwrap().field();
        let m = Gapless::with_delta(0.0).unwrap();
        let q = QuadratureConfig::default();
        let init = StateSpec::ProductInitial {
            qubit: QubitState::ground(),
            field: Box::new(StateSpec::Vacuum),
        };
        let r = reduced_qubit(&f, &init, 2.3, &m, &q).unwrap();
        let gamma = decoherence(&f, 2.3, &q).unwrap();
        assert!((r.rho_x[0][0].re - 0.5).abs() < 1e-14);
        assert!((r.rho_x[0][1].norm() - 0.5 * (-gamma).exp()).abs() < 1e-14);
        let r0 = reduced_qubit(&f, &init, 0.0, &m, &q).unwrap();
        assert!(r0.entropy.abs() < 1e-12);
    }

    #[test]
    fn times_strictly_increase() {
        let mut s = TimeSeries::new("x", true);
        s.push(0.0, ZERO).unwrap();
        assert!(s.push(0.0, ZERO).is_err());
    }
}
