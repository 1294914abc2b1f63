//! One-particle space of the field: either the continuum of radial modes of a
//! [`CouplingFunction`] or a finite set of discrete modes. Every closed-form
//! formula in `dynamics` and `thermal` is written once against this type, so
//! the same code evaluates continuum integrals and the finite sums the oracle
//! is compared with.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modespace::{CouplingFunction, TestFunction};
use crate::oracle::DiscreteModes;
use crate::quadrature::{Estimate, QuadValue, QuadratureConfig, QuadratureFailure, Upper};

const MAX_OSCILLATION_BREAKS: usize = 400_000;

#[derive(Debug, Clone)]
pub enum Field {
    Continuum(CouplingFunction),
    Discrete(DiscreteModes),
}

/// A single mode as seen by an integrand.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    pub index: usize,
    pub k: f64,
    pub omega: f64,
    /// `lambda F_k` (continuum) or `c_j` (discrete).
    pub coupling: Complex64,
}

impl TestFunction {
    #[inline]
    pub fn at(&self, m: &Mode) -> Complex64 {
        match self {
            TestFunction::Radial(r) => r.eval(m.k),
            TestFunction::Discrete(v) => v[m.index],
        }
    }
}

/// Integration hints: effective support, extra breakpoints, and the time
/// whose phase `e^{i omega t}` oscillates in the integrand.
#[derive(Debug, Clone, Default)]
pub struct Hints {
    pub support: Option<f64>,
    pub breaks: Vec<f64>,
    pub time: f64,
}

impl Hints {
    pub fn support(support: Option<f64>) -> Self {
        Self {
            support,
            ..Default::default()
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.breaks.extend_from_slice(breaks);
        self
    }
}

/// The smaller of two effective supports (`None` is unbounded).
pub fn min_support(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// The larger of two effective supports (`None` is unbounded).
pub fn max_support(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

pub(crate) fn quad_error(what: impl Into<String>) -> impl FnOnce(QuadratureFailure) -> Error {
    let what = what.into();
    move |e| match e {
        QuadratureFailure::NotConverged { value, error, panels } => Error::Quadrature {
            what,
            value,
            error,
            panels,
        },
        QuadratureFailure::NonFinite { at } => {
            Error::Domain(format!("{what}: integrand not finite at k = {at}"))
        }
    }
}

impl Field {
    pub fn discrete(&self) -> Option<&DiscreteModes> {
        match self {
            Field::Discrete(d) => Some(d),
            Field::Continuum(_) => None,
        }
    }

    pub fn continuum(&self) -> Option<&CouplingFunction> {
        match self {
            Field::Continuum(c) => Some(c),
            Field::Discrete(_) => None,
        }
    }

    pub fn is_massless(&self) -> bool {
        match self {
            Field::Continuum(c) => c.mode_space.dispersion.is_massless(),
            Field::Discrete(_) => false,
        }
    }

    /// Same field with every coupling multiplied by `s` (`s = -1` is the
    /// Z2 image).
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Field::Continuum(c) => Field::Continuum(c.with_lambda(c.lambda * s)),
            Field::Discrete(d) => Field::Discrete(d.scaled(s)),
        }
    }

    /// Effective support of `lambda F_k`.
    pub fn coupling_support(&self) -> Option<f64> {
        match self {
            Field::Continuum(c) => {
                if c.lambda == 0.0 {
                    Some(0.0)
                } else {
                    c.profile.effective_support()
                }
            }
            Field::Discrete(_) => None,
        }
    }

    pub fn mode_at(&self, k: f64) -> Mode {
        let c = self.continuum().expect("mode_at on a continuum field");
        Mode {
            index: 0,
            k,
            omega: c.omega(k),
            coupling: Complex64::new(c.amplitude(k), 0.0),
        }
    }

    /// Rejects test functions of the wrong kind or length.
    pub fn check(&self, g: &TestFunction) -> Result<()> {
        match (self, g) {
            (Field::Continuum(_), TestFunction::Radial(_)) => Ok(()),
            (Field::Discrete(d), TestFunction::Discrete(v)) if v.len() == d.len() => Ok(()),
            (Field::Discrete(d), TestFunction::Discrete(v)) => Err(Error::DimensionMismatch {
                expected: d.len(),
                got: v.len(),
            }),
            (Field::Continuum(_), TestFunction::Discrete(_)) => Err(Error::Domain(
                "discrete test function used with a continuum field".into(),
            )),
            (Field::Discrete(_), TestFunction::Radial(_)) => Err(Error::Domain(
                "radial test function used with discrete modes".into(),
            )),
        }
    }

    /// `int d^n k h(k)` (continuum) or `sum_j h(j)` (discrete).
    pub fn integrate<T: QuadValue>(
        &self,
        h: impl Fn(&Mode) -> T,
        hints: &Hints,
        quad: &QuadratureConfig,
    ) -> Result<Estimate<T>, QuadratureFailure> {
        match self {
            Field::Discrete(d) => {
                let mut acc = T::default();
                for j in 0..d.len() {
                    let v = h(&d.mode(j));
                    if !v.magnitude().is_finite() {
                        return Err(QuadratureFailure::NonFinite { at: d.momenta[j] });
                    }
                    acc = acc + v;
                }
                Ok(Estimate {
                    value: acc,
                    error: 0.0,
                    panels: 0,
                })
            }
            Field::Continuum(c) => {
                if hints.support == Some(0.0) {
                    return Ok(Estimate {
                        value: T::default(),
                        error: 0.0,
                        panels: 0,
                    });
                }
                let disp = c.mode_space.dispersion;
                let (_, hi) = c.profile.domain();
                let mut breaks = c.profile.breakpoints();
                breaks.extend_from_slice(&hints.breaks);
                let upper = match hints.support {
                    Some(s) => Upper::Finite(s.min(hi)),
                    None if hi.is_finite() => Upper::Finite(hi),
                    None => Upper::Infinite,
                };
                if hints.time != 0.0 {
                    let reach = match upper {
                        Upper::Finite(s) => s,
                        Upper::Infinite => 200.0,
                    };
                    let top = disp.eval(reach);
                    let period = 2.0 * PI / hints.time.abs();
                    let first = (disp.mass() / period).floor() as usize + 1;
                    let count = ((top / period).ceil() as usize).min(first + MAX_OSCILLATION_BREAKS);
                    breaks.extend((first..count).filter_map(|j| disp.momentum_at(j as f64 * period)));
                }
                let integrand = |k: f64| {
                    let m = Mode {
                        index: 0,
                        k,
                        omega: disp.eval(k),
                        coupling: Complex64::new(c.amplitude(k), 0.0),
                    };
                    h(&m)
                };
                // Tabulated profiles are defined only on their table; the field
                // is taken to carry no coupling outside it, but test functions
                // still live on the whole half-line.
                c.mode_space.integrate_radial(integrand, 0.0, upper, &breaks, quad)
            }
        }
    }

    /// `<f, g> = int d^n k conj(f_k) g_k`.
    pub fn inner(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        time: f64,
        quad: &QuadratureConfig,
    ) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        let hints = Hints::support(min_support(f.support(), g.support()))
            .at_time(time)
            .with_breaks(&breaks_of(f))
            .with_breaks(&breaks_of(g));
        self.integrate(|m| f.at(m).conj() * g.at(m), &hints, quad)
            .map(|e| e.value)
            .map_err(quad_error(format!("<{}, {}>", f.label(), g.label())))
    }

    /// `<f, K g>` with a real multiplier `K(omega)`.
    pub fn kernel_inner(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        kernel: impl Fn(f64) -> f64,
        what: &str,
        quad: &QuadratureConfig,
    ) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        let hints = Hints::support(min_support(f.support(), g.support()))
            .with_breaks(&breaks_of(f))
            .with_breaks(&breaks_of(g));
        self.integrate(|m| f.at(m).conj() * g.at(m) * kernel(m.omega), &hints, quad)
            .map(|e| e.value)
            .map_err(quad_error(what))
    }

    pub fn norm_sqr(&self, g: &TestFunction, quad: &QuadratureConfig) -> Result<f64> {
        self.check(g)?;
        let hints = Hints::support(g.support()).with_breaks(&breaks_of(g));
        self.integrate(|m| g.at(m).norm_sqr(), &hints, quad)
            .map(|e| e.value)
            .map_err(quad_error(format!("norm of {}", g.label())))
    }

    /// Pointwise transform `g -> op(mode, g_k)`.
    pub fn map(
        &self,
        g: &TestFunction,
        label: impl Into<String>,
        support: Option<f64>,
        op: impl Fn(&Mode, Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<TestFunction> {
        self.check(g)?;
        Ok(match self {
            Field::Discrete(d) => {
                TestFunction::Discrete((0..d.len()).map(|j| op(&d.mode(j), g.at(&d.mode(j)))).collect())
            }
            Field::Continuum(c) => {
                let c = c.clone();
                let g = g.clone();
                let breaks = {
                    let mut b = breaks_of(&g);
                    b.extend(c.profile.breakpoints());
                    b
                };
                TestFunction::radial_unchecked(
                    label,
                    move |k| {
                        let m = Mode {
                            index: 0,
                            k,
                            omega: c.omega(k),
                            coupling: Complex64::new(c.amplitude(k), 0.0),
                        };
                        op(&m, g.at(&m))
                    },
                    support,
                    breaks,
                )
            }
        })
    }

    /// A function of the mode alone, e.g. `lambda F_k / omega_k`.
    pub fn mode_function(
        &self,
        label: impl Into<String>,
        support: Option<f64>,
        op: impl Fn(&Mode) -> Complex64 + Send + Sync + 'static,
    ) -> TestFunction {
        match self {
            Field::Discrete(d) => TestFunction::Discrete((0..d.len()).map(|j| op(&d.mode(j))).collect()),
            Field::Continuum(c) => {
                let c = c.clone();
                let breaks = c.profile.breakpoints();
                TestFunction::radial_unchecked(
                    label,
                    move |k| {
                        op(&Mode {
                            index: 0,
                            k,
                            omega: c.omega(k),
                            coupling: Complex64::new(c.amplitude(k), 0.0),
                        })
                    },
                    support,
                    breaks,
                )
            }
        }
    }

    /// `lambda F_k` as a test function.
    pub fn coupling_function(&self) -> TestFunction {
        self.mode_function("lambda F", self.coupling_support(), |m| m.coupling)
    }

    /// Zero test function of the right kind.
    pub fn zero_function(&self) -> TestFunction {
        match self {
            Field::Discrete(d) => TestFunction::Discrete(vec![Complex64::new(0.0, 0.0); d.len()]),
            Field::Continuum(_) => TestFunction::zero(),
        }
    }
}

fn breaks_of(g: &TestFunction) -> Vec<f64> {
    match g {
        TestFunction::Radial(r) => r.breaks.clone(),
        TestFunction::Discrete(_) => Vec::new(),
    }
}
