//! JSON run configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::StateSpec;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::modespace::{CouplingFunction, Dispersion, ModeSpace, SpatialProfile, TabulatedProfile, TestFunction};
use crate::oracle::{DiscreteModes, NmaxPolicy, Strategy};
use crate::qubit::{Axis, Branch, QubitState};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Exactly one of `diagnose`, `dynamics`, `thermal`, `validate`.
    pub task: Task,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_dim")]
    pub n: usize,
    #[serde(default = "default_dispersion")]
    pub dispersion: Dispersion,
    pub profile: Option<ProfileSpec>,
    #[serde(default = "default_one")]
    pub lambda: f64,
    #[serde(default)]
    pub delta: f64,
    /// Qubit level splitting; dynamics require zero.
    #[serde(default)]
    pub gap: f64,
    /// Explicit finite mode set in place of the continuum coupling.
    pub modes: Option<ModesSpec>,
}

fn default_dim() -> usize {
    3
}

fn default_dispersion() -> Dispersion {
    Dispersion::Massless
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Gaussian { width: f64 },
    Lorentzian { width: f64 },
    CompactBump { radius: f64 },
    Pointlike { cutoff: f64 },
    PowerRegularized { exponent: f64, base: Box<ProfileSpec> },
    /// Two-column CSV `k, F~(k)`.
    Tabulated { path: PathBuf },
}

impl ProfileSpec {
    pub fn build(&self, dim: usize, base_dir: &Path) -> Result<SpatialProfile> {
        match self {
            ProfileSpec::Gaussian { width } => SpatialProfile::gaussian(*width),
            ProfileSpec::Lorentzian { width } => SpatialProfile::lorentzian(*width),
            ProfileSpec::CompactBump { radius } => SpatialProfile::compact_bump(*radius, dim),
            ProfileSpec::Pointlike { cutoff } => SpatialProfile::pointlike(*cutoff),
            ProfileSpec::PowerRegularized { exponent, base } => {
                SpatialProfile::power_regularized(*exponent, base.build(dim, base_dir)?)
            }
            ProfileSpec::Tabulated { path } => {
                Ok(SpatialProfile::Tabulated(TabulatedProfile::from_csv(base_dir.join(path))?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSpec {
    pub omegas: Vec<f64>,
    /// Real numbers or `[re, im]` pairs.
    pub couplings: Vec<ComplexSpec>,
}

/// A real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(self) -> C {
        match self {
            ComplexSpec::Real(x) => C::new(x, 0.0),
            ComplexSpec::Pair([re, im]) => C::new(re, im),
        }
    }
}

impl Default for ComplexSpec {
    fn default() -> Self {
        ComplexSpec::Real(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Diagnose(DiagnoseTask),
    Dynamics(DynamicsTask),
    Thermal(ThermalTask),
    Validate(ValidateTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Diagnose(_) => "diagnose",
            Task::Dynamics(_) => "dynamics",
            Task::Thermal(_) => "thermal",
            Task::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseTask {
    #[serde(default = "default_one")]
    pub omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    /// `A k^p exp(-w^2 k^2 / 2)`.
    Gaussian {
        #[serde(default)]
        amplitude: ComplexSpec,
        width: f64,
        #[serde(default)]
        power: f64,
    },
    /// `scale * lambda F`.
    Coupling {
        #[serde(default)]
        scale: ComplexSpec,
    },
    /// One amplitude per discrete mode.
    Discrete { values: Vec<ComplexSpec> },
}

impl TestFunctionSpec {
    pub fn build(&self, field: &Field) -> Result<TestFunction> {
        let g = match self {
            TestFunctionSpec::Gaussian { amplitude, width, power } => match field {
                Field::Continuum(c) => TestFunction::gaussian(&c.mode_space, amplitude.value(), *width, *power)?,
                Field::Discrete(_) => {
                    return Err(Error::Config(
                        "a gaussian test function needs a continuum model; use kind = discrete".into(),
                    ))
                }
            },
            TestFunctionSpec::Coupling { scale } => {
                let s = scale.value();
                field.mode_function(format!("{s} lambda F"), field.coupling_support(), move |m| s * m.coupling)
            }
            TestFunctionSpec::Discrete { values } => {
                TestFunction::discrete(values.iter().map(|v| v.value()).collect())
            }
        };
        field.check(&g)?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Values(Vec<f64>),
    /// `count` equally spaced samples on `[start, stop]`.
    Linear {
        #[serde(default)]
        start: f64,
        stop: f64,
        count: usize,
    },
}

impl TimeGrid {
    pub fn samples(&self) -> Result<Vec<f64>> {
        let t = match self {
            TimeGrid::Values(v) => v.clone(),
            TimeGrid::Linear { start, stop, count } => match *count {
                0 => return Err(Error::Config("time grid needs count >= 1".into())),
                1 => vec![*start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        };
        crate::dynamics::check_times(&t)?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Weyl,
    SigmaX,
    SigmaY,
    SigmaZ,
    Gamma,
    BosonNumber,
    Theta,
    Entropy,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Weyl => "weyl",
            Channel::SigmaX => "sigma_x",
            Channel::SigmaY => "sigma_y",
            Channel::SigmaZ => "sigma_z",
            Channel::Gamma => "gamma",
            Channel::BosonNumber => "boson_number",
            Channel::Theta => "theta",
            Channel::Entropy => "entropy",
        }
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            Channel::SigmaX => Some(Axis::X),
            Channel::SigmaY => Some(Axis::Y),
            Channel::SigmaZ => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn is_real(self) -> bool {
        !matches!(self, Channel::Weyl)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QubitSpec {
    Ground,
    Excited,
    Plus,
    Minus,
    Tracial,
    /// `a |e> + b |g>`.
    Pure { a: ComplexSpec, b: ComplexSpec },
    /// Density matrix in the `{|e>, |g>}` basis.
    Density { matrix: [[ComplexSpec; 2]; 2] },
}

impl QubitSpec {
    pub fn build(&self) -> Result<QubitState> {
        Ok(match self {
            QubitSpec::Ground => QubitState::ground(),
            QubitSpec::Excited => QubitState::excited(),
            QubitSpec::Plus => QubitState::branch(Branch::Plus),
            QubitSpec::Minus => QubitState::branch(Branch::Minus),
            QubitSpec::Tracial => QubitState::tracial(),
            QubitSpec::Pure { a, b } => QubitState::pure_z(a.value(), b.value())?,
            QubitSpec::Density { matrix } => {
                QubitState::from_z_basis(matrix.map(|row| row.map(ComplexSpec::value)))?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Vacuum,
    Coherent { amplitude: TestFunctionSpec },
    Kms { beta: f64, branch: Branch },
    JointGround { branch: Branch },
    /// Uses the model's `delta`.
    JointThermal { beta: f64 },
    Product { qubit: QubitSpec, field: Box<StateConfig> },
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig::Product {
            qubit: QubitSpec::Ground,
            field: Box::new(StateConfig::Vacuum),
        }
    }
}

impl StateConfig {
    pub fn build(&self, field: &Field, delta: f64) -> Result<StateSpec> {
        Ok(match self {
            StateConfig::Vacuum => StateSpec::Vacuum,
            StateConfig::Coherent { amplitude } => StateSpec::Coherent(amplitude.build(field)?),
            StateConfig::Kms { beta, branch } => StateSpec::Kms {
                beta: *beta,
                branch: *branch,
            },
            StateConfig::JointGround { branch } => StateSpec::JointGround(*branch),
            StateConfig::JointThermal { beta } => StateSpec::JointThermal { beta: *beta, delta },
            StateConfig::Product { qubit, field: f } => StateSpec::ProductInitial {
                qubit: qubit.build()?,
                field: Box::new(f.build(field, delta)?),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsTask {
    pub g: Option<TestFunctionSpec>,
    pub times: TimeGrid,
    pub observables: Vec<Channel>,
    #[serde(default)]
    pub initial: StateConfig,
    /// Horizons `T` at which `N(2T) - N(T)` is reported.
    #[serde(default)]
    pub horizons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalTask {
    pub betas: Vec<f64>,
    pub g: TestFunctionSpec,
    #[serde(default = "default_ground_tol")]
    pub ground_tolerance: f64,
}

fn default_ground_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateTask {
    /// Mode count when a continuum model is discretized.
    pub m: Option<usize>,
    pub strategy: Option<Strategy>,
    #[serde(default)]
    pub n_max: NmaxPolicy,
    #[serde(default = "default_ground_tol")]
    pub tolerance: f64,
    /// Tolerance of time-series rows; defaults to `tolerance`.
    pub dynamics_tolerance: Option<f64>,
    /// Weyl argument, one amplitude per mode; defaults to `0.3 + 0.1 i` on every mode.
    pub g: Option<Vec<ComplexSpec>>,
    pub times: Option<TimeGrid>,
    #[serde(default)]
    pub betas: Vec<f64>,
    /// Occupation cutoff of the single-mode thermal oracle.
    #[serde(default = "default_thermal_nmax")]
    pub thermal_n_max: usize,
}

fn default_thermal_nmax() -> usize {
    120
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Range checks the schema cannot express.
    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        let mut bad = Vec::new();
        if m.n == 0 {
            bad.push("model.n must be >= 1".to_string());
        }
        if !m.lambda.is_finite() {
            bad.push("model.lambda must be finite".to_string());
        }
        if !m.delta.is_finite() {
            bad.push("model.delta must be finite".to_string());
        }
        if !m.gap.is_finite() {
            bad.push("model.gap must be finite".to_string());
        }
        match (&m.profile, &m.modes) {
            (None, None) => bad.push("model needs either profile or modes".to_string()),
            (Some(_), Some(_)) => bad.push("model.profile and model.modes are exclusive".to_string()),
            _ => {}
        }
        if let Some(modes) = &m.modes {
            if modes.omegas.len() != modes.couplings.len() {
                bad.push("model.modes.omegas and model.modes.couplings differ in length".to_string());
            }
        }
        let positive_betas = |b: &[f64], key: &str, bad: &mut Vec<String>| {
            if b.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                bad.push(format!("{key} must be positive"));
            }
        };
        match &self.task {
            Task::Diagnose(d) => {
                if !(d.omega0 > 0.0) {
                    bad.push("task.diagnose.omega0 must be positive".to_string());
                }
            }
            Task::Dynamics(d) => {
                if d.observables.is_empty() {
                    bad.push("task.dynamics.observables is empty".to_string());
                }
                if d.observables.contains(&Channel::Weyl) && d.g.is_none() {
                    bad.push("task.dynamics.g is required for the weyl channel".to_string());
                }
            }
            Task::Thermal(t) => {
                if t.betas.is_empty() {
                    bad.push("task.thermal.betas is empty".to_string());
                }
                positive_betas(&t.betas, "task.thermal.betas", &mut bad);
            }
            Task::Validate(v) => {
                positive_betas(&v.betas, "task.validate.betas", &mut bad);
                if m.modes.is_none() && v.m.is_none() {
                    bad.push("task.validate.m is required for a continuum model".to_string());
                }
                if !(v.tolerance > 0.0) {
                    bad.push("task.validate.tolerance must be positive".to_string());
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Continuum coupling; `None` for an explicit mode set.
    pub fn coupling(&self, base_dir: &Path) -> Result<Option<CouplingFunction>> {
        let m = &self.model;
        let Some(p) = &m.profile else { return Ok(None) };
        let space = ModeSpace::new(m.n, m.dispersion)?;
        Ok(Some(CouplingFunction::new(space, p.build(m.n, base_dir)?, m.lambda)?))
    }

    /// Explicit modes scaled by `lambda`.
    pub fn discrete_modes(&self) -> Result<Option<DiscreteModes>> {
        let Some(spec) = &self.model.modes else { return Ok(None) };
        let couplings = spec.couplings.iter().map(|c| c.value() * self.model.lambda).collect();
        Ok(Some(DiscreteModes::new(spec.omegas.clone(), couplings)?))
    }

    pub fn field(&self, base_dir: &Path) -> Result<Field> {
        if let Some(modes) = self.discrete_modes()? {
            return Ok(modes.field());
        }
        match self.coupling(base_dir)? {
            Some(c) => Ok(Field::Continuum(c)),
            None => Err(Error::Config("model needs either profile or modes".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal() {
        let cfg = RunConfig::from_json(
            r#"{"model": {"n": 3, "profile": {"family": "gaussian", "width": 1.0}},
                "task": {"diagnose": {"omega0": 1.0}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.task.name(), "diagnose");
        assert_eq!(cfg.model.dispersion, Dispersion::Massless);
    }

    #[test]
    fn rejects_unknown_keys_and_two_tasks() {
        let e = RunConfig::from_json(
            r#"{"model": {"profile": {"family": "gaussian", "width": 1.0}, "lamda": 2},
                "task": {"diagnose": {}}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("lamda"), "{e}");
        let e = RunConfig::from_json(
            r#"{"model": {"profile": {"family": "gaussian", "width": 1.0}},
                "task": {"diagnose": {}, "thermal": {"betas": [1], "g": {"kind": "coupling"}}}}"#,
        )
        .unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn range_errors_are_collected() {
        let e = RunConfig::from_json(
            r#"{"model": {"n": 0, "lambda": 1.0, "profile": {"family": "gaussian", "width": 1.0}},
                "task": {"thermal": {"betas": [-1], "g": {"kind": "coupling"}}}}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("model.n") && e.contains("betas"), "{e}");
    }

    #[test]
    fn linear_grid() {
        let t = TimeGrid::Linear {
            start: 0.0,
            stop: 1.0,
            count: 3,
        };
        assert_eq!(t.samples().unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
