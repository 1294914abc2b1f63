//! Divergence integrals `R_j = int d^n k |lambda F_k|^2 / omega^j`, their
//! finite/divergent verdicts and the resulting classification of the model.
//!
//! A verdict of `Divergent` always comes from the local power-law exponent of
//! the radial integrand at the offending end, never from a quadrature that
//! failed to converge.

use std::fmt;
use std::io::Write;

use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::field::quad_error;
use crate::modespace::{sphere_area, CouplingFunction};
use crate::powerlaw::{infrared_exponent, ultraviolet_exponent, FitFailure, FitSettings, PowerLawFit};
use crate::quadrature::{QuadratureConfig, Upper};

/// Part of k-space, split at `omega(k) = omega_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "omega0", rename_all = "snake_case")]
pub enum Region {
    Infrared(f64),
    Ultraviolet(f64),
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    IR,
    UV,
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            End::IR => "IR",
            End::UV => "UV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IntegralVerdict {
    Finite { value: f64, error_estimate: f64 },
    Divergent { end: End, local_exponent: f64 },
}

impl IntegralVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, IntegralVerdict::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            IntegralVerdict::Finite { value, .. } => Some(value),
            IntegralVerdict::Divergent { .. } => None,
        }
    }

    pub fn diverges_at(&self, end: End) -> bool {
        matches!(*self, IntegralVerdict::Divergent { end: e, .. } if e == end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    UvSingular,
    UnboundedBelow,
    BoundedBelowNonFock,
    FockRegular,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Numerical knobs shared by every diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticSettings {
    pub omega0: f64,
    pub quadrature: QuadratureConfig,
    pub fit: FitSettings,
    /// Tolerance on the `p = -1` divergence threshold.
    pub exponent_margin: f64,
}

impl Default for DiagnosticSettings {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            quadrature: QuadratureConfig::default(),
            fit: FitSettings::default(),
            exponent_margin: 0.02,
        }
    }
}

impl DiagnosticSettings {
    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub r0: IntegralVerdict,
    pub r1: IntegralVerdict,
    pub r2: IntegralVerdict,
    pub classification: Classification,
    pub ground_energy: Option<f64>,
    /// Two-fold at `Delta = 0`.
    pub ground_degeneracy: Option<u8>,
    pub mean_soft_bosons: Option<f64>,
    pub omega0: f64,
    pub tolerances: DiagnosticSettings,
}

fn check_j(j: i32) -> Result<()> {
    if (-1..=2).contains(&j) {
        Ok(())
    } else {
        Err(Error::Domain(format!("R_j needs j in {{0, 1, 2}}, got {j}")))
    }
}

/// Radial integrand `S_{n-1} k^{n-1} lambda^2 F_k^2 / omega^j`.
fn radial_integrand(c: &CouplingFunction, j: i32) -> impl Fn(f64) -> f64 + '_ {
    let s = sphere_area(c.dim());
    let n = c.dim() as i32;
    move |k: f64| {
        let w = c.weight(k);
        if w == 0.0 {
            return 0.0;
        }
        s * k.powi(n - 1) * w / c.omega(k).powi(j)
    }
}

/// Momentum `k_0` with `omega(k_0) = omega_0`; `None` when `omega_0` is below
/// the mass and the infrared ball is empty.
fn split_momentum(c: &CouplingFunction, omega0: f64) -> Result<Option<f64>> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::Domain(format!("split frequency must be positive, got {omega0}")));
    }
    Ok(c.mode_space.dispersion.momentum_at(omega0).filter(|&k| k > 0.0))
}

fn fit_error(what: &str, e: FitFailure) -> Error {
    let reason = match e {
        FitFailure::NotPowerLaw {
            best_residual,
            last_slope,
        } => format!(
            "integrand is not a power law (best residual {best_residual:.3e}, last slope {last_slope:.3})"
        ),
        FitFailure::TooFewWindows { available } => {
            format!("only {available} dyadic windows fit inside the admissible range")
        }
        FitFailure::Quadrature { window } => {
            format!("window mean on [{:e}, {:e}] did not converge", window.0, window.1)
        }
    };
    Error::Inconclusive {
        what: what.to_string(),
        reason,
    }
}

/// Local exponent of the `R_j` radial integrand as `k -> 0`.
pub fn ir_exponent(c: &CouplingFunction, j: i32, settings: &DiagnosticSettings) -> Result<PowerLawFit> {
    check_j(j)?;
    let start = split_momentum(c, settings.omega0)?.unwrap_or(settings.omega0);
    let (lo, _) = c.profile.domain();
    let start = start.min(c.profile.effective_support().unwrap_or(f64::INFINITY));
    infrared_exponent(radial_integrand(c, j), start, lo, &settings.fit, &settings.quadrature)
        .map_err(|e| fit_error(&format!("R_{j} infrared exponent"), e))
}

/// Local exponent of the `R_j` radial integrand as `k -> infinity`; `-inf`
/// for compactly supported or superpolynomially decaying couplings.
pub fn uv_exponent(c: &CouplingFunction, j: i32, settings: &DiagnosticSettings) -> Result<PowerLawFit> {
    check_j(j)?;
    if c.profile.effective_support().is_some() {
        return Ok(PowerLawFit {
            exponent: f64::NEG_INFINITY,
            residual: 0.0,
            shift: 0,
            samples: Vec::new(),
        });
    }
    let start = split_momentum(c, settings.omega0)?.unwrap_or(settings.omega0).max(1.0);
    ultraviolet_exponent(
        radial_integrand(c, j),
        start,
        f64::INFINITY,
        &settings.fit,
        &settings.quadrature,
    )
    .map_err(|e| fit_error(&format!("R_{j} ultraviolet exponent"), e))
}

/// `R_j` over `region`.
///
/// `j = -1` is accepted for the `int |lambda F|^2 omega` moment that governs
/// short-time phases.
pub fn r_integral(
    c: &CouplingFunction,
    j: i32,
    region: Region,
    settings: &DiagnosticSettings,
) -> Result<IntegralVerdict> {
    check_j(j)?;
    if c.lambda == 0.0 {
        return Ok(IntegralVerdict::Finite {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let omega0 = match region {
        Region::Infrared(w) | Region::Ultraviolet(w) => w,
        Region::Full => settings.omega0,
    };
    let k0 = split_momentum(c, omega0)?;
    let local = DiagnosticSettings { omega0, ..*settings };

    let has_ir = !matches!(region, Region::Ultraviolet(_)) && (region == Region::Full || k0.is_some());
    let has_uv = !matches!(region, Region::Infrared(_));

    let (dom_lo, _) = c.profile.domain();
    let mut ir_fit = None;
    if has_ir {
        let fit = ir_exponent(c, j, &local)?;
        if fit.exponent <= -1.0 + settings.exponent_margin {
            return Ok(IntegralVerdict::Divergent {
                end: End::IR,
                local_exponent: fit.exponent,
            });
        }
        ir_fit = Some(fit);
    }
    if has_uv {
        let fit = uv_exponent(c, j, &local)?;
        if fit.exponent >= -1.0 - settings.exponent_margin {
            return Ok(IntegralVerdict::Divergent {
                end: End::UV,
                local_exponent: fit.exponent,
            });
        }
    }

    let (lower, upper) = match region {
        Region::Full => (0.0, Upper::Infinite),
        Region::Infrared(_) => (0.0, Upper::Finite(k0.unwrap_or(0.0))),
        Region::Ultraviolet(_) => (k0.unwrap_or(0.0), Upper::Infinite),
    };
    let upper = match (upper, c.profile.effective_support()) {
        (Upper::Infinite, Some(s)) => Upper::Finite(s.max(lower)),
        (Upper::Finite(b), Some(s)) => Upper::Finite(b.min(s)),
        (u, None) => u,
    };
    let mut breaks = c.profile.breakpoints();
    breaks.extend(k0);
    let est = c
        .mode_space
        .integrate_radial(
            |k| {
                let w = c.weight(k);
                if w == 0.0 {
                    0.0
                } else {
                    w / c.omega(k).powi(j)
                }
            },
            lower,
            upper,
            &breaks,
            &settings.quadrature,
        )
        .map_err(quad_error(format!("R_{j} over {region:?}")))?;

    // A tabulated coupling stops at its first sample; the power law fitted
    // there bounds what lies below it.
    let mut error_estimate = est.error;
    if has_ir && dom_lo > 0.0 {
        if let Some(fit) = ir_fit.filter(|f| f.exponent.is_finite()) {
            let h = radial_integrand(c, j)(dom_lo);
            error_estimate += h * dom_lo / (fit.exponent + 1.0);
        }
    }
    Ok(IntegralVerdict::Finite {
        value: est.value,
        error_estimate,
    })
}

/// `R_j` verdict on the infrared ball `omega <= omega_0` together with the
/// fitted exponent that certified it.
pub fn ir_verdict(
    c: &CouplingFunction,
    j: i32,
    settings: &DiagnosticSettings,
) -> Result<(IntegralVerdict, PowerLawFit)> {
    let fit = ir_exponent(c, j, settings)?;
    let verdict = if c.lambda == 0.0 {
        IntegralVerdict::Finite {
            value: 0.0,
            error_estimate: 0.0,
        }
    } else if fit.exponent <= -1.0 + settings.exponent_margin {
        IntegralVerdict::Divergent {
            end: End::IR,
            local_exponent: fit.exponent,
        }
    } else {
        r_integral(c, j, Region::Infrared(settings.omega0), settings)?
    };
    Ok((verdict, fit))
}

fn classification_of(r0: &IntegralVerdict, r1: &IntegralVerdict, r2: &IntegralVerdict) -> Classification {
    if r0.diverges_at(End::UV) {
        Classification::UvSingular
    } else if !r1.is_finite() {
        Classification::UnboundedBelow
    } else if !r2.is_finite() {
        Classification::BoundedBelowNonFock
    } else {
        Classification::FockRegular
    }
}

/// All three verdicts, the classification and the derived ground-state data.
pub fn classify(c: &CouplingFunction, delta: f64, settings: &DiagnosticSettings) -> Result<DiagnosticsReport> {
    if !delta.is_finite() {
        return Err(Error::Domain(format!("Delta must be finite, got {delta}")));
    }
    let r0 = r_integral(c, 0, Region::Full, settings)?;
    let r1 = r_integral(c, 1, Region::Full, settings)?;
    let r2 = r_integral(c, 2, Region::Full, settings)?;

    // Dropping a power of 1/omega only helps in the infrared.
    if !r0.diverges_at(End::UV) && ((r2.is_finite() && !r1.is_finite()) || (r1.is_finite() && !r0.is_finite())) {
        return Err(Error::Internal(format!(
            "R_j chain violated: r0 = {r0:?}, r1 = {r1:?}, r2 = {r2:?}"
        )));
    }

    let classification = classification_of(&r0, &r1, &r2);
    let ground_energy = r1.value().map(|v| -v - delta.abs());
    Ok(DiagnosticsReport {
        r0,
        r1,
        r2,
        classification,
        ground_energy,
        ground_degeneracy: ground_energy.map(|_| if delta == 0.0 { 2 } else { 1 }),
        mean_soft_bosons: r2.value(),
        omega0: settings.omega0,
        tolerances: *settings,
    })
}

/// `E_0 = -R_1 - |Delta|`.
pub fn ground_energy(c: &CouplingFunction, delta: f64, settings: &DiagnosticSettings) -> Result<f64> {
    match r_integral(c, 1, Region::Full, settings)? {
        IntegralVerdict::Finite { value, .. } => Ok(-value - delta.abs()),
        IntegralVerdict::Divergent { end, local_exponent } => Err(Error::UnboundedBelow(format!(
            "{end} end, local exponent {local_exponent:.3}"
        ))),
    }
}

/// Poisson probability of `count` given the mean.
pub fn poisson_pmf(mean: f64, count: u64) -> f64 {
    if mean == 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    (count as f64 * mean.ln() - mean - ln_factorial(count)).exp()
}

/// Probability of finding `count` bosons in `region` in the dressed ground
/// state; the mean is `R_2` of the region.
pub fn boson_pmf(c: &CouplingFunction, region: Region, count: u64, settings: &DiagnosticSettings) -> Result<f64> {
    match r_integral(c, 2, region, settings)? {
        IntegralVerdict::Finite { value, .. } => Ok(poisson_pmf(value, count)),
        IntegralVerdict::Divergent { end, local_exponent } => Err(Error::InfiniteSoftBosons(format!(
            "{region:?}: {end} end, local exponent {local_exponent:.3}"
        ))),
    }
}

/// Van Hove regularity: the first type needs `R_0` IR-finite and `R_2`
/// UV-finite, the second `R_1` IR-finite and `R_2` UV-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VanHoveConditions {
    pub first_type: bool,
    pub second_type: bool,
}

pub fn van_hove_conditions(z: &CouplingFunction, settings: &DiagnosticSettings) -> Result<VanHoveConditions> {
    let ir_finite = |j| -> Result<bool> {
        Ok(r_integral(z, j, Region::Infrared(settings.omega0), settings)?.is_finite())
    };
    let r2_uv = r_integral(z, 2, Region::Ultraviolet(settings.omega0), settings)?.is_finite();
    Ok(VanHoveConditions {
        first_type: ir_finite(0)? && r2_uv,
        second_type: ir_finite(1)? && r2_uv,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub lambda: f64,
    pub mass: f64,
    pub delta: f64,
    pub classification: Option<Classification>,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub ground_energy: Option<f64>,
    pub error: Option<String>,
}

/// Classifies every coupling; failures are recorded per row.
pub fn sweep(cases: &[(String, CouplingFunction)], delta: f64, settings: &DiagnosticSettings) -> Vec<SweepRow> {
    cases
        .iter()
        .map(|(label, c)| {
            let base = SweepRow {
                label: label.clone(),
                lambda: c.lambda,
                mass: c.mode_space.dispersion.mass(),
                delta,
                classification: None,
                r0: None,
                r1: None,
                r2: None,
                ground_energy: None,
                error: None,
            };
            match classify(c, delta, settings) {
                Ok(r) => SweepRow {
                    classification: Some(r.classification),
                    r0: r.r0.value(),
                    r1: r.r1.value(),
                    r2: r.r2.value(),
                    ground_energy: r.ground_energy,
                    ..base
                },
                Err(e) => SweepRow {
                    error: Some(e.to_string()),
                    ..base
                },
            }
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "label",
        "lambda",
        "mass",
        "delta",
        "classification",
        "r0",
        "r1",
        "r2",
        "ground_energy",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.lambda.to_string(),
            r.mass.to_string(),
            r.delta.to_string(),
            r.classification.map(|c| c.to_string()).unwrap_or_default(),
            opt(r.r0),
            opt(r.r1),
            opt(r.r2),
            opt(r.ground_energy),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modespace::{ModeSpace, SpatialProfile};
    use std::f64::consts::PI;

    fn gaussian(n: usize, mass: f64, sigma: f64, lambda: f64) -> CouplingFunction {
        let space = if mass == 0.0 {
            ModeSpace::massless(n).unwrap()
        } else {
            ModeSpace::massive(n, mass).unwrap()
        };
        CouplingFunction::new(space, SpatialProfile::gaussian(sigma).unwrap(), lambda).unwrap()
    }

    #[test]
    fn decoupled_is_zero() {
        let c = gaussian(3, 0.0, 1.0, 0.0);
        for j in 0..3 {
            assert_eq!(
                r_integral(&c, j, Region::Full, &Default::default()).unwrap(),
                IntegralVerdict::Finite {
                    value: 0.0,
                    error_estimate: 0.0
                }
            );
        }
    }

    #[test]
    fn gaussian_r1_closed_form() {
        let c = gaussian(3, 0.0, 1.0, 1.0);
        let v = r_integral(&c, 1, Region::Full, &Default::default()).unwrap();
        let exact = PI.sqrt() / (8.0 * PI * PI);
        assert!((v.value().unwrap() / exact - 1.0).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn gaussian_r2_ir_log_divergent() {
        let c = gaussian(3, 0.0, 1.0, 1.0);
        match r_integral(&c, 2, Region::Full, &Default::default()).unwrap() {
            IntegralVerdict::Divergent { end, local_exponent } => {
                assert_eq!(end, End::IR);
                assert!((local_exponent + 1.0).abs() < 0.05);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn region_additivity() {
        let c = gaussian(3, 0.5, 0.7, 1.3);
        let s = DiagnosticSettings::default().with_omega0(0.9);
        for j in 0..3 {
            let full = r_integral(&c, j, Region::Full, &s).unwrap().value().unwrap();
            let ir = r_integral(&c, j, Region::Infrared(0.9), &s).unwrap().value().unwrap();
            let uv = r_integral(&c, j, Region::Ultraviolet(0.9), &s).unwrap().value().unwrap();
            assert!(((ir + uv) / full - 1.0).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn empty_infrared_ball_below_mass() {
        let c = gaussian(3, 2.0, 1.0, 1.0);
        let v = r_integral(&c, 2, Region::Infrared(1.0), &Default::default()).unwrap();
        assert_eq!(v.value(), Some(0.0));
    }

    #[test]
    fn ground_energy_scaling() {
        let s = DiagnosticSettings::default();
        let e1 = ground_energy(&gaussian(3, 0.0, 1.0, 1.0), 0.0, &s).unwrap();
        let e2 = ground_energy(&gaussian(3, 0.0, 1.0, 2.0), 0.0, &s).unwrap();
        assert!((e2 / e1 - 4.0).abs() < 1e-9);
        assert_eq!(ground_energy(&gaussian(3, 0.0, 1.0, 0.0), 0.7, &s).unwrap(), -0.7);
    }

    #[test]
    fn pmf_normalises() {
        let mu = 2.5;
        let s: f64 = (0..60).map(|n| poisson_pmf(mu, n)).sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
    }

    #[test]
    fn divergent_r2_is_infinite_soft_bosons() {
        let c = gaussian(3, 0.0, 1.0, 1.0);
        let e = boson_pmf(&c, Region::Full, 0, &Default::default()).unwrap_err();
        assert!(matches!(e, Error::InfiniteSoftBosons(_)));
    }

    #[test]
    fn report_json_fields() {
        let c = gaussian(3, 1.0, 1.0, 1.0);
        let r = classify(&c, 0.3, &Default::default()).unwrap();
        assert_eq!(r.classification, Classification::FockRegular);
        let v = serde_json::to_value(&r).unwrap();
        for key in ["r0", "r1", "r2", "classification", "ground_energy", "mean_soft_bosons", "omega0", "tolerances"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
