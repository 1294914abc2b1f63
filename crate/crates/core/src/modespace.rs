//! Field kinematics, detector smearing profiles and the k-space coupling.
//!
//! Profiles are isotropic and are carried by their radial Fourier transform
//! `F~(k)`, normalised so that `F~(0) = 1` wherever that makes sense. The
//! coupling seen by mode `k` in flat space is
//! `lambda F~(k) / sqrt(2 (2 pi)^n omega(k))`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{Estimate, QuadValue, QuadratureConfig, QuadratureFailure, Upper};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    Massless,
    /// An effective mass also stands in for curvature couplings.
    Massive { mass: f64 },
}

impl Dispersion {
    pub fn massive(mass: f64) -> Result<Self> {
        if mass.is_finite() && mass > 0.0 {
            Ok(Dispersion::Massive { mass })
        } else if mass == 0.0 {
            Ok(Dispersion::Massless)
        } else {
            Err(Error::Domain(format!("mass must be finite and >= 0, got {mass}")))
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            Dispersion::Massless => 0.0,
            Dispersion::Massive { mass } => mass,
        }
    }

    pub fn is_massless(&self) -> bool {
        self.mass() == 0.0
    }

    /// `sqrt(k^2 + m^2)` without domain checks.
    #[inline]
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            Dispersion::Massless => k,
            Dispersion::Massive { mass } => k.hypot(mass),
        }
    }

    /// Momentum magnitude with `omega(k) = w`, if any.
    pub fn momentum_at(&self, w: f64) -> Option<f64> {
        let m = self.mass();
        (w >= m).then(|| ((w - m) * (w + m)).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModeSpace {
    pub dim: usize,
    pub dispersion: Dispersion,
}

impl ModeSpace {
    pub fn new(dim: usize, dispersion: Dispersion) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("spatial dimension must be >= 1".into()));
        }
        if let Dispersion::Massive { mass } = dispersion {
            Dispersion::massive(mass)?;
        }
        Ok(Self { dim, dispersion })
    }

    pub fn massless(dim: usize) -> Result<Self> {
        Self::new(dim, Dispersion::Massless)
    }

    pub fn massive(dim: usize, mass: f64) -> Result<Self> {
        Self::new(dim, Dispersion::massive(mass)?)
    }

    /// `S_{n-1} int_0^inf k^{n-1} h(k) dk`.
    pub fn integrate_radial<T: QuadValue>(
        &self,
        h: impl Fn(f64) -> T,
        lower: f64,
        upper: Upper,
        breaks: &[f64],
        quad: &QuadratureConfig,
    ) -> Result<Estimate<T>, QuadratureFailure> {
        let n = self.dim as i32;
        let s = sphere_area(self.dim);
        let est = quad.integrate(|k| h(k) * k.powi(n - 1), lower, upper, breaks)?;
        Ok(Estimate {
            value: est.value * s,
            error: est.error * s,
            panels: est.panels,
        })
    }
}

/// Angular frequency of a mode with momentum magnitude `k`.
pub fn omega(space: &ModeSpace, k: f64) -> Result<f64> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("momentum must be finite and >= 0, got {k}")));
    }
    Ok(space.dispersion.eval(k))
}

/// Area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere_area needs n >= 1");
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0),
    }
}

/// Radial samples of a Fourier transform with monotone cubic interpolation
/// in `ln k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    k: Vec<f64>,
    log_k: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(k: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if k.len() != values.len() || k.len() < 2 {
            return Err(Error::Domain("tabulated profile needs >= 2 (k, F) pairs".into()));
        }
        if k.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain("tabulated k must be positive and finite".into()));
        }
        if k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("tabulated k must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("tabulated values must be finite".into()));
        }
        let log_k: Vec<f64> = k.iter().map(|x| x.ln()).collect();
        let slopes = fritsch_carlson(&log_k, &values);
        Ok(Self {
            k,
            log_k,
            values,
            slopes,
        })
    }

    /// Reads `k, F~(k)` rows; `#` starts a comment.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(file);
        let (mut ks, mut vs) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Config(format!(
                    "{}: row {} has {} columns, expected 2",
                    path.display(),
                    line + 1,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| {
                    Error::Config(format!("{}: row {}: {e}", path.display(), line + 1))
                })
            };
            ks.push(parse(&record[0])?);
            vs.push(parse(&record[1])?);
        }
        Self::new(ks, vs)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.k[0], self.k[self.k.len() - 1])
    }

    pub fn eval(&self, k: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(k >= lo && k <= hi) {
            return Err(Error::OutOfTable { k, lo, hi });
        }
        let x = k.ln().clamp(self.log_k[0], self.log_k[self.log_k.len() - 1]);
        let i = match self.log_k.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.log_k.len() - 2),
        };
        let (x0, x1) = (self.log_k[i], self.log_k[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1])
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialProfile {
    /// `F~(k) = exp(-sigma^2 k^2 / 2)`.
    Gaussian { width: f64 },
    /// Poisson-kernel profile, `F~(k) = exp(-sigma k)`.
    Lorentzian { width: f64 },
    /// Uniform ball of radius `rho` in `dim` dimensions.
    CompactBump { radius: f64, dim: usize },
    /// Flat transform with a hard UV cutoff.
    Pointlike { cutoff: f64 },
    /// `k^a` times the base transform.
    PowerRegularized { exponent: f64, base: Box<SpatialProfile> },
    Tabulated(TabulatedProfile),
}

impl SpatialProfile {
    pub fn gaussian(width: f64) -> Result<Self> {
        positive("gaussian width", width)?;
        Ok(Self::Gaussian { width })
    }

    pub fn lorentzian(width: f64) -> Result<Self> {
        positive("lorentzian width", width)?;
        Ok(Self::Lorentzian { width })
    }

    pub fn compact_bump(radius: f64, dim: usize) -> Result<Self> {
        positive("bump radius", radius)?;
        if dim == 0 {
            return Err(Error::Domain("bump dimension must be >= 1".into()));
        }
        Ok(Self::CompactBump { radius, dim })
    }

    pub fn pointlike(cutoff: f64) -> Result<Self> {
        positive("pointlike UV cutoff", cutoff)?;
        Ok(Self::Pointlike { cutoff })
    }

    pub fn power_regularized(exponent: f64, base: SpatialProfile) -> Result<Self> {
        if !(exponent >= 0.0) || !exponent.is_finite() {
            return Err(Error::Domain(format!("IR exponent must be >= 0, got {exponent}")));
        }
        Ok(Self::PowerRegularized {
            exponent,
            base: Box::new(base),
        })
    }

    /// Power `a` of the small-k behaviour `F~(k) ~ k^a`, when known in closed form.
    pub fn ir_power(&self) -> Option<f64> {
        match self {
            Self::Gaussian { .. }
            | Self::Lorentzian { .. }
            | Self::CompactBump { .. }
            | Self::Pointlike { .. } => Some(0.0),
            Self::PowerRegularized { exponent, base } => base.ir_power().map(|a| a + exponent),
            Self::Tabulated(_) => None,
        }
    }

    /// Momentum beyond which the transform is negligible (below ~1e-17), if
    /// the family decays that fast.
    pub fn effective_support(&self) -> Option<f64> {
        match self {
            Self::Gaussian { width } => Some(80f64.sqrt() / width),
            Self::Lorentzian { width } => Some(40.0 / width),
            Self::CompactBump { .. } => None,
            Self::Pointlike { cutoff } => Some(*cutoff),
            Self::PowerRegularized { exponent, base } => {
                base.effective_support().map(|s| s * (1.0 + 0.1 * exponent.max(1.0)))
            }
            Self::Tabulated(t) => Some(t.range().1),
        }
    }

    /// Points where the transform is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Pointlike { cutoff } => vec![*cutoff],
            Self::PowerRegularized { base, .. } => base.breakpoints(),
            Self::Tabulated(t) => {
                let (lo, hi) = t.range();
                vec![lo, hi]
            }
            _ => Vec::new(),
        }
    }

    /// Momentum range on which the transform is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Tabulated(t) => t.range(),
            Self::PowerRegularized { base, .. } => base.domain(),
            _ => (0.0, f64::INFINITY),
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {v}")))
    }
}

/// Radial Fourier transform `F~(k)` of a smearing profile.
pub fn profile_fourier(profile: &SpatialProfile, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("momentum must be >= 0, got {k}")));
    }
    Ok(match profile {
        SpatialProfile::Gaussian { width } => (-0.5 * width * width * k * k).exp(),
        SpatialProfile::Lorentzian { width } => (-width * k).exp(),
        SpatialProfile::CompactBump { radius, dim } => ball_transform(*dim, k * radius),
        SpatialProfile::Pointlike { cutoff } => {
            if k <= *cutoff {
                1.0
            } else {
                0.0
            }
        }
        SpatialProfile::PowerRegularized { exponent, base } => {
            let b = profile_fourier(base, k)?;
            if b == 0.0 {
                0.0
            } else {
                k.powf(*exponent) * b
            }
        }
        SpatialProfile::Tabulated(t) => t.eval(k)?,
    })
}

/// Fourier transform of the normalised indicator of the unit `n`-ball at
/// `x = k rho`: `Gamma(n/2+1) (2/x)^{n/2} J_{n/2}(x)`.
fn ball_transform(n: usize, x: f64) -> f64 {
    let x = x.abs();
    match n {
        1 => {
            if x < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
        3 => {
            if x < 1e-2 {
                let x2 = x * x;
                1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
            } else {
                3.0 * (x.sin() - x * x.cos()) / (x * x * x)
            }
        }
        _ => {
            // Poisson integral: c_n int_0^{pi/2} 2 cos^n(t) cos(x sin t) dt.
            let nf = n as f64;
            let c = gamma(nf / 2.0 + 1.0) / (gamma((nf + 1.0) / 2.0) * PI.sqrt());
            let q = QuadratureConfig {
                rel_tol: 1e-13,
                abs_tol: 1e-17,
                max_panels: 4_000,
                ..Default::default()
            };
            let breaks: Vec<f64> = if x > 8.0 {
                let m = (x / PI).ceil() as usize;
                (1..m).map(|j| (j as f64 * PI / x).min(1.0).asin()).collect()
            } else {
                Vec::new()
            };
            q.integrate(
                |t: f64| 2.0 * t.cos().powi(n as i32) * (x * t.sin()).cos(),
                0.0,
                Upper::Finite(PI / 2.0),
                &breaks,
            )
            .map(|e| c * e.value)
            .unwrap_or(f64::NAN)
        }
    }
}

/// The detector-field coupling `lambda F_k` in flat static spacetime.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFunction {
    pub mode_space: ModeSpace,
    pub profile: SpatialProfile,
    pub lambda: f64,
}

impl CouplingFunction {
    pub fn new(mode_space: ModeSpace, profile: SpatialProfile, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("coupling strength must be finite, got {lambda}")));
        }
        check_bump_dims(&profile, mode_space.dim)?;
        Ok(Self {
            mode_space,
            profile,
            lambda,
        })
    }

    /// Van Hove source `z_k = J~(k)/sqrt(2 (2 pi)^n omega)`.
    pub fn van_hove(mode_space: ModeSpace, source: SpatialProfile) -> Result<Self> {
        Self::new(mode_space, source, 1.0)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.mode_space.dim
    }

    pub fn omega(&self, k: f64) -> f64 {
        self.mode_space.dispersion.eval(k)
    }

    /// `F_k` without the coupling strength.
    pub fn unit_value(&self, k: f64) -> Result<f64> {
        let w = omega(&self.mode_space, k)?;
        if w == 0.0 {
            return Err(Error::SingularPoint {
                k,
                what: "massless coupling function at k = 0",
            });
        }
        let ft = profile_fourier(&self.profile, k)?;
        if ft == 0.0 {
            return Ok(0.0);
        }
        let norm = 2.0 * (2.0 * PI).powi(self.mode_space.dim as i32) * w;
        Ok(ft / norm.sqrt())
    }

    /// `lambda^2 |F_k|^2`, returning zero outside the profile domain. Used by
    /// integrals, which never sample `k = 0`.
    pub fn weight(&self, k: f64) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.profile.domain();
        if k < lo || k > hi {
            return 0.0;
        }
        match self.unit_value(k) {
            Ok(v) => self.lambda * self.lambda * v * v,
            Err(_) => f64::NAN,
        }
    }

    /// `lambda F_k`, zero outside the profile domain.
    pub fn amplitude(&self, k: f64) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.profile.domain();
        if k < lo || k > hi {
            return 0.0;
        }
        self.unit_value(k).map(|v| self.lambda * v).unwrap_or(f64::NAN)
    }
}

fn check_bump_dims(profile: &SpatialProfile, n: usize) -> Result<()> {
    match profile {
        SpatialProfile::CompactBump { dim, .. } if *dim != n => Err(Error::Domain(format!(
            "compact bump built for n = {dim} used in n = {n}"
        ))),
        SpatialProfile::PowerRegularized { base, .. } => check_bump_dims(base, n),
        _ => Ok(()),
    }
}

/// `lambda F~(k) / sqrt(2 (2 pi)^n omega(k))`.
pub fn coupling_value(coupling: &CouplingFunction, k: f64) -> Result<f64> {
    if coupling.lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(coupling.lambda * coupling.unit_value(k)?)
}

type RadialFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A square-integrable radial function on k-space.
#[derive(Clone)]
pub struct RadialFunction {
    f: RadialFn,
    pub support: Option<f64>,
    pub breaks: Vec<f64>,
    pub label: String,
}

impl RadialFunction {
    #[inline]
    pub fn eval(&self, k: f64) -> Complex64 {
        (self.f)(k)
    }
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

/// Momentum-space smearing function `g_k` of a Weyl generator.
///
/// `Discrete` holds one amplitude per mode of a finite mode set.
#[derive(Debug, Clone)]
pub enum TestFunction {
    Radial(RadialFunction),
    Discrete(Vec<Complex64>),
}

impl TestFunction {
    /// Wraps `f` after checking `int d^n k |f|^2 < inf`.
    pub fn radial(
        space: &ModeSpace,
        label: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        support: Option<f64>,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        let rf = RadialFunction {
            f: Arc::new(f),
            support,
            breaks,
            label: label.into(),
        };
        let g = TestFunction::Radial(rf);
        g.radial_norm_sqr(space)?;
        Ok(g)
    }

    /// Built without the norm check; for functions composed from already
    /// admissible pieces.
    pub(crate) fn radial_unchecked(
        label: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        support: Option<f64>,
        breaks: Vec<f64>,
    ) -> Self {
        TestFunction::Radial(RadialFunction {
            f: Arc::new(f),
            support,
            breaks,
            label: label.into(),
        })
    }

    /// `A k^p exp(-w^2 k^2 / 2)`.
    pub fn gaussian(space: &ModeSpace, amplitude: Complex64, width: f64, power: f64) -> Result<Self> {
        positive("test-function width", width)?;
        if !power.is_finite() {
            return Err(Error::Domain("test-function power must be finite".into()));
        }
        let support = (80f64 + 4.0 * power.max(0.0)).sqrt() / width * 1.2;
        Self::radial(
            space,
            format!("gaussian(A={amplitude}, w={width}, p={power})"),
            move |k: f64| amplitude * k.powf(power) * (-0.5 * width * width * k * k).exp(),
            Some(support),
            Vec::new(),
        )
    }

    pub fn discrete(values: Vec<Complex64>) -> Self {
        TestFunction::Discrete(values)
    }

    pub fn zero() -> Self {
        Self::radial_unchecked("0", |_| Complex64::new(0.0, 0.0), Some(0.0), Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TestFunction::Radial(r) => r.support == Some(0.0),
            TestFunction::Discrete(v) => v.iter().all(|z| z.norm() == 0.0),
        }
    }

    pub fn support(&self) -> Option<f64> {
        match self {
            TestFunction::Radial(r) => r.support,
            TestFunction::Discrete(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Radial(r) => r.label.clone(),
            TestFunction::Discrete(v) => format!("discrete[{}]", v.len()),
        }
    }

    fn radial_norm_sqr(&self, space: &ModeSpace) -> Result<f64> {
        let TestFunction::Radial(r) = self else {
            return Ok(0.0);
        };
        let quad = QuadratureConfig::default();
        let upper = match r.support {
            Some(s) => Upper::Finite(s),
            None => Upper::Infinite,
        };
        let est = space
            .integrate_radial(|k| r.eval(k).norm_sqr(), 0.0, upper, &r.breaks, &quad)
            .map_err(|e| match e {
                QuadratureFailure::NonFinite { at } => Error::Domain(format!(
                    "test function {} is not finite at k = {at}",
                    r.label
                )),
                QuadratureFailure::NotConverged { value, error, panels } => Error::Quadrature {
                    what: format!("norm of {}", r.label),
                    value,
                    error,
                    panels,
                },
            })?;
        Ok(est.value)
    }
}
