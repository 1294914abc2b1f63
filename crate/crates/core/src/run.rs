//! Config-driven batch runs behind the command-line front end.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when a run
//! completes but some verdict or channel failed.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Channel, DiagnoseTask, DynamicsTask, Format, RunConfig, Task, ThermalTask, TimeGrid, ValidateTask};
use crate::diagnostics::{classify, write_sweep_csv, DiagnosticSettings, DiagnosticsReport, SweepRow};
use crate::dynamics::{
    decoherence, dyadic_increments, evolve_sigma, evolve_weyl, mean_boson_number, reduced_qubit, state_expectation,
    theta_phase, Gapless, StateSpec, TimeSeries,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::modespace::TestFunction;
use crate::oracle::{
    converged_system, discretize, expectation, gibbs_weyl, occupation_stats, check_truncation, DiscreteModes,
    GroundState, Observable, OracleSystem, Propagator, Strategy,
};
use crate::output::{to_json, write_atomic};
use crate::qubit::{entropy, Axis, Branch, QubitState};
use crate::quadrature::QuadratureConfig;
use crate::thermal::{beta_sweep, ground_weyl, kms_weyl, write_sweep_csv as write_thermal_csv};

type C = Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Where and how a run writes its results.
#[derive(Debug, Clone)]
pub struct RunContext {
    /// Directory relative paths in the config are resolved against.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl RunContext {
    pub fn from_config(cfg: &RunConfig, base_dir: impl Into<PathBuf>) -> Self {
        let base_dir = base_dir.into();
        Self {
            out_dir: base_dir.join(&cfg.output.dir),
            base_dir,
            formats: cfg.output.formats.clone(),
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&self, name: &str, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<()> {
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        files.push(path);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs the single task of `cfg`. `Err` means the configuration could not be
/// turned into a run.
pub fn run(cfg: &RunConfig, ctx: &RunContext) -> Result<RunOutcome> {
    cfg.validate()?;
    match &cfg.task {
        Task::Diagnose(t) => run_diagnose(cfg, t, ctx),
        Task::Dynamics(t) => run_dynamics(cfg, t, ctx),
        Task::Thermal(t) => run_thermal(cfg, t, ctx),
        Task::Validate(t) => run_validate(cfg, t, ctx),
    }
}

fn as_config_error(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::Io { .. } => e,
        other => Error::Config(other.to_string()),
    }
}

#[derive(Debug, Serialize)]
struct DiagnoseOutput<'a> {
    task: &'static str,
    report: Option<&'a DiagnosticsReport>,
    error: Option<String>,
}

pub fn run_diagnose(cfg: &RunConfig, task: &DiagnoseTask, ctx: &RunContext) -> Result<RunOutcome> {
    let c = cfg
        .coupling(&ctx.base_dir)
        .map_err(as_config_error)?
        .ok_or_else(|| Error::Config("diagnose needs model.profile".into()))?;
    let settings = DiagnosticSettings::default().with_omega0(task.omega0);
    let result = classify(&c, cfg.model.delta, &settings);
    let (report, error) = match &result {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut files = Vec::new();
    let summary = match report {
        Some(r) => {
            let mut s = format!("classification: {}\n", r.classification);
            for (name, v) in [("R_0", &r.r0), ("R_1", &r.r1), ("R_2", &r.r2)] {
                s.push_str(&format!("{name}: {}\n", verdict_text(v)));
            }
            match r.ground_energy {
                Some(e) => s.push_str(&format!("ground energy: {e}\n")),
                None => s.push_str("ground energy: unbounded below\n"),
            }
            if let Some(m) = r.mean_soft_bosons {
                s.push_str(&format!("mean soft bosons: {m}\n"));
            }
            s
        }
        None => format!("inconclusive: {}\n", error.as_deref().unwrap_or("")),
    };
    if ctx.wants(Format::Json) {
        let out = DiagnoseOutput {
            task: "diagnose",
            report,
            error: error.clone(),
        };
        ctx.write("diagnose.json", to_json(&out)?.as_bytes(), &mut files)?;
    }
    if ctx.wants(Format::Csv) {
        let row = SweepRow {
            label: format!("{:?}", cfg.model.profile),
            lambda: c.lambda,
            mass: c.mode_space.dispersion.mass(),
            delta: cfg.model.delta,
            classification: report.map(|r| r.classification),
            r0: report.and_then(|r| r.r0.value()),
            r1: report.and_then(|r| r.r1.value()),
            r2: report.and_then(|r| r.r2.value()),
            ground_energy: report.and_then(|r| r.ground_energy),
            error: error.clone(),
        };
        let mut buf = Vec::new();
        write_sweep_csv(&[row], &mut buf)?;
        ctx.write("diagnose.csv", &buf, &mut files)?;
    }
    ctx.write("diagnose.txt", summary.as_bytes(), &mut files)?;
    Ok(RunOutcome {
        exit_code: if result.is_ok() { EXIT_OK } else { EXIT_FAILED },
        files,
        summary,
    })
}

fn verdict_text(v: &crate::diagnostics::IntegralVerdict) -> String {
    use crate::diagnostics::IntegralVerdict::*;
    match v {
        Finite { value, error_estimate } => format!("{value} (+- {error_estimate:.1e})"),
        Divergent { end, local_exponent } => format!("divergent at {end} end, local exponent {local_exponent:.4}"),
    }
}

#[derive(Debug, Serialize)]
struct ChannelOutput {
    channel: &'static str,
    series: Option<TimeSeries>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct DynamicsOutput {
    task: &'static str,
    channels: Vec<ChannelOutput>,
    dyadic_increments: Vec<(f64, f64)>,
    dyadic_error: Option<String>,
}

fn channel_value(
    field: &Field,
    channel: Channel,
    state: &StateSpec,
    g: Option<&TestFunction>,
    t: f64,
    model: &Gapless,
    quad: &QuadratureConfig,
) -> Result<C> {
    let real = |x: f64| C::new(x, 0.0);
    Ok(match channel {
        Channel::Weyl => {
            let g = g.ok_or_else(|| Error::Config("weyl channel needs g".into()))?;
            state_expectation(field, state, &evolve_weyl(field, g, t, model, quad)?, quad)?
        }
        Channel::SigmaX | Channel::SigmaY | Channel::SigmaZ => {
            let axis = channel.axis().expect("sigma channel");
            real(state_expectation(field, state, &evolve_sigma(field, axis, t, model, quad)?, quad)?.re)
        }
        Channel::Gamma => real(decoherence(field, t, quad)?),
        Channel::BosonNumber => real(mean_boson_number(field, t, quad)?),
        Channel::Theta => real(theta_phase(field, t, quad)?),
        Channel::Entropy => real(reduced_qubit(field, state, t, model, quad)?.entropy),
    })
}

pub fn run_dynamics(cfg: &RunConfig, task: &DynamicsTask, ctx: &RunContext) -> Result<RunOutcome> {
    let model = Gapless::new(cfg.model.gap, cfg.model.delta).map_err(as_config_error)?;
    let field = cfg.field(&ctx.base_dir).map_err(as_config_error)?;
    let times = task.times.samples().map_err(as_config_error)?;
    let g = task.g.as_ref().map(|s| s.build(&field)).transpose().map_err(as_config_error)?;
    let state = task.initial.build(&field, cfg.model.delta).map_err(as_config_error)?;
    let quad = QuadratureConfig::default();

    let mut channels: Vec<Channel> = task.observables.clone();
    channels.sort();
    channels.dedup();
    let mut outputs = Vec::new();
    let mut failed = false;
    for ch in channels {
        let mut series = TimeSeries::new(ch.name(), ch.is_real()).with_meta("delta", cfg.model.delta);
        let mut error = None;
        for &t in &times {
            match channel_value(&field, ch, &state, g.as_ref(), t, &model, &quad) {
                Ok(v) => series.push(t, v)?,
                Err(e) => {
                    error = Some(format!("t = {t}: {e}"));
                    break;
                }
            }
        }
        failed |= error.is_some();
        outputs.push(ChannelOutput {
            channel: ch.name(),
            series: error.is_none().then_some(series),
            error,
        });
    }
    let (dyadic, dyadic_error) = if task.horizons.is_empty() {
        (Vec::new(), None)
    } else {
        match dyadic_increments(&field, &task.horizons, &quad) {
            Ok(v) => (v, None),
            Err(e) => {
                failed = true;
                (Vec::new(), Some(e.to_string()))
            }
        }
    };

    let mut files = Vec::new();
    if ctx.wants(Format::Csv) {
        for o in &outputs {
            if let Some(s) = &o.series {
                let mut buf = Vec::new();
                s.write_csv(&mut buf)?;
                ctx.write(&format!("{}.csv", o.channel), &buf, &mut files)?;
            }
        }
        if !dyadic.is_empty() {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["horizon", "increment"])?;
            for (t, d) in &dyadic {
                w.write_record([t.to_string(), d.to_string()])?;
            }
            let buf = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
            ctx.write("dyadic_increments.csv", &buf, &mut files)?;
        }
    }
    let summary = outputs
        .iter()
        .map(|o| match &o.error {
            None => format!("{}: {} samples\n", o.channel, times.len()),
            Some(e) => format!("{}: error: {e}\n", o.channel),
        })
        .collect::<String>();
    let out = DynamicsOutput {
        task: "dynamics",
        channels: outputs,
        dyadic_increments: dyadic,
        dyadic_error,
    };
    if ctx.wants(Format::Json) {
        ctx.write("dynamics.json", to_json(&out)?.as_bytes(), &mut files)?;
    }
    Ok(RunOutcome {
        exit_code: if failed { EXIT_FAILED } else { EXIT_OK },
        files,
        summary,
    })
}

#[derive(Debug, Serialize)]
struct ThermalOutput {
    task: &'static str,
    delta: f64,
    rows: Vec<crate::thermal::ThermalRow>,
    error: Option<String>,
}

pub fn run_thermal(cfg: &RunConfig, task: &ThermalTask, ctx: &RunContext) -> Result<RunOutcome> {
    let field = cfg.field(&ctx.base_dir).map_err(as_config_error)?;
    let g = task.g.build(&field).map_err(as_config_error)?;
    let quad = QuadratureConfig::default();
    let result = beta_sweep(&field, &task.betas, cfg.model.delta, &g, task.ground_tolerance, &quad);
    let (rows, error) = match result {
        Ok(r) => (r, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let mut files = Vec::new();
    if ctx.wants(Format::Csv) && error.is_none() {
        let mut buf = Vec::new();
        write_thermal_csv(&rows, &mut buf)?;
        ctx.write("thermal.csv", &buf, &mut files)?;
    }
    let summary = match (&error, rows.last()) {
        (Some(e), _) => format!("error: {e}\n"),
        (None, _) => {
            let flag = rows.iter().find_map(|r| r.ground_converged);
            format!("{} beta values; ground-converged: {}\n", rows.len(), flag.unwrap_or(false))
        }
    };
    let out = ThermalOutput {
        task: "thermal",
        delta: cfg.model.delta,
        rows,
        error: error.clone(),
    };
    if ctx.wants(Format::Json) {
        ctx.write("thermal.json", to_json(&out)?.as_bytes(), &mut files)?;
    }
    Ok(RunOutcome {
        exit_code: if error.is_some() { EXIT_FAILED } else { EXIT_OK },
        files,
        summary,
    })
}

/// A real or complex number in a validation row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    fn of(z: C) -> Self {
        Number::Complex([z.re, z.im])
    }

    fn text(&self) -> String {
        match self {
            Number::Real(x) => x.to_string(),
            Number::Complex([re, im]) => format!("{re}{im:+}i"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub quantity: String,
    pub closed_form: Option<Number>,
    pub oracle: Option<Number>,
    pub abs_diff: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Why a row failed.
    pub cause: Option<String>,
}

impl ValidationRow {
    fn compare(quantity: impl Into<String>, closed: Number, oracle: Number, diff: f64, tolerance: f64) -> Self {
        let pass = diff <= tolerance;
        Self {
            quantity: quantity.into(),
            closed_form: Some(closed),
            oracle: Some(oracle),
            abs_diff: Some(diff),
            tolerance,
            pass,
            cause: (!pass).then(|| "difference exceeds tolerance".to_string()),
        }
    }

    fn failed(quantity: impl Into<String>, tolerance: f64, cause: &Error) -> Self {
        let cause = cause.to_string();
        Self {
            quantity: quantity.into(),
            closed_form: None,
            oracle: None,
            abs_diff: None,
            tolerance,
            pass: false,
            cause: Some(cause),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub task: &'static str,
    pub modes: usize,
    pub n_max: Option<usize>,
    pub convergence: Vec<(usize, f64)>,
    pub rows: Vec<ValidationRow>,
    pub all_pass: bool,
}

fn validation_modes(cfg: &RunConfig, task: &ValidateTask, base_dir: &Path) -> Result<DiscreteModes> {
    if let Some(m) = cfg.discrete_modes()? {
        return Ok(m);
    }
    let c = cfg
        .coupling(base_dir)?
        .ok_or_else(|| Error::Config("validate needs model.profile or model.modes".into()))?;
    let m = task.m.ok_or_else(|| Error::Config("task.validate.m is required".into()))?;
    let strategy = match task.strategy {
        Some(s) => s,
        None => Strategy::GaussPanels {
            k_max: c.profile.effective_support().ok_or_else(|| {
                Error::Config("task.validate.strategy is required for profiles without compact support".into())
            })?,
        },
    };
    discretize(&c, m, strategy)
}

/// Initial qubit of the time-series rows, `(0.8 |e> + 0.6 |g>) (x) |0>`.
const VALIDATION_QUBIT: [f64; 2] = [0.8, 0.6];

fn series_rows(
    sys: &OracleSystem,
    ground: &GroundState,
    field: &Field,
    g: &TestFunction,
    g_vec: &[C],
    times: &[f64],
    delta: f64,
    tol: f64,
    rows: &mut Vec<ValidationRow>,
) -> Result<()> {
    let quad = QuadratureConfig::default();
    let model = Gapless::with_delta(delta)?;
    let [a, b] = VALIDATION_QUBIT;
    let qubit = QubitState::pure_z(C::new(a, 0.0), C::new(b, 0.0))?;
    let state = StateSpec::ProductInitial {
        qubit,
        field: Box::new(StateSpec::Vacuum),
    };
    let psi0 = sys.product_with_vacuum([C::new(a, 0.0), C::new(b, 0.0)]);
    let prop = match Propagator::from_ground(sys, ground) {
        Ok(p) => p,
        Err(e) => {
            for q in ["weyl_series", "sigma_x_series", "sigma_x_conservation", "entropy_series"] {
                rows.push(ValidationRow::failed(q, tol, &e));
            }
            return Ok(());
        }
    };

    // (worst diff, t, closed, oracle) per series.
    let mut worst: [(f64, f64, Number, Number); 4] = [(0.0, 0.0, Number::Real(0.0), Number::Real(0.0)); 4];
    let mut errors: [Option<Error>; 4] = Default::default();
    let sx0 = expectation(sys, &psi0, &Observable::SigmaAxis(Axis::X))?.scalar().expect("scalar").re;
    for &t in times {
        let psi = prop.evolve(sys, &psi0, t)?;
        let closed = [
            state_expectation(field, &state, &evolve_weyl(field, g, t, &model, &quad)?, &quad)?,
            state_expectation(field, &state, &evolve_sigma(field, Axis::X, t, &model, &quad)?, &quad)?,
            C::new(reduced_qubit(field, &state, t, &model, &quad)?.entropy, 0.0),
        ];
        let oracle = (|| -> Result<[C; 3]> {
            let w = expectation(sys, &psi, &Observable::WeylDisplacement(g_vec.to_vec()))?.scalar().expect("scalar");
            let sx = expectation(sys, &psi, &Observable::SigmaAxis(Axis::X))?.scalar().expect("scalar");
            let rho = expectation(sys, &psi, &Observable::QubitReduced)?.matrix().expect("matrix");
            Ok([w, sx, C::new(entropy(&rho), 0.0)])
        })();
        let oracle = match oracle {
            Ok(o) => o,
            Err(e) => {
                for slot in errors.iter_mut() {
                    slot.get_or_insert_with(|| clone_error(&e));
                }
                break;
            }
        };
        let pairs = [
            (closed[0], oracle[0], Number::of(closed[0]), Number::of(oracle[0])),
            (closed[1], oracle[1], Number::Real(closed[1].re), Number::Real(oracle[1].re)),
            (C::new(sx0, 0.0), oracle[1], Number::Real(sx0), Number::Real(oracle[1].re)),
            (closed[2], oracle[2], Number::Real(closed[2].re), Number::Real(oracle[2].re)),
        ];
        for (slot, (c, o, cn, on)) in worst.iter_mut().zip(pairs) {
            let d = (c - o).norm();
            if d > slot.0 || t == times[0] {
                *slot = (d.max(slot.0), t, cn, on);
            }
        }
    }
    let names = ["weyl_series", "sigma_x_series", "sigma_x_conservation", "entropy_series"];
    for (i, name) in names.iter().enumerate() {
        match &errors[i] {
            Some(e) => rows.push(ValidationRow::failed(*name, tol, e)),
            None => {
                let (d, t, c, o) = worst[i];
                rows.push(ValidationRow::compare(format!("{name} (worst at t = {t})"), c, o, d, tol));
            }
        }
    }
    Ok(())
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::Truncation(s) => Error::Truncation(s.clone()),
        other => Error::Internal(other.to_string()),
    }
}

pub fn validation_rows(cfg: &RunConfig, task: &ValidateTask, base_dir: &Path) -> Result<ValidationReport> {
    let modes = validation_modes(cfg, task, base_dir)?;
    let delta = cfg.model.delta;
    let tol = task.tolerance;
    let dyn_tol = task.dynamics_tolerance.unwrap_or(tol);
    let field = modes.field();
    let quad = QuadratureConfig::default();
    let g_vec: Vec<C> = match &task.g {
        Some(v) if v.len() == modes.len() => v.iter().map(|z| z.value()).collect(),
        Some(v) => {
            return Err(Error::Config(format!(
                "task.validate.g has {} entries for {} modes",
                v.len(),
                modes.len()
            )))
        }
        None => vec![C::new(0.3, 0.1); modes.len()],
    };
    let g = TestFunction::discrete(g_vec.clone());
    let mut rows = Vec::new();

    let (sys, ground) = match converged_system(&modes, delta, task.n_max) {
        Ok(x) => x,
        Err(e) => {
            rows.push(ValidationRow::failed("oracle n_max convergence", tol, &e));
            return Ok(ValidationReport {
                task: "validate",
                modes: modes.len(),
                n_max: None,
                convergence: match e {
                    Error::NotConverged(t) => t,
                    _ => Vec::new(),
                },
                all_pass: false,
                rows,
            });
        }
    };

    // Ground energy, relative to its magnitude.
    let closed = modes.ground_energy(delta);
    let scale = closed.abs().max(1.0);
    let mut row = ValidationRow::compare(
        "ground_energy",
        Number::Real(closed),
        Number::Real(ground.energy),
        (closed - ground.energy).abs(),
        tol * scale,
    );
    if !row.pass {
        if let Err(e) = check_truncation(&sys, &occupation_stats(&sys, &ground.state)) {
            row.cause = Some(e.to_string());
        }
    }
    rows.push(row);

    // Ground-state Weyl expectations of each degenerate branch.
    let branches: Vec<Branch> = if delta == 0.0 {
        Branch::BOTH.to_vec()
    } else {
        vec![Branch::ground_for(delta)]
    };
    let zero = vec![C::new(0.0, 0.0); sys.field_dim()];
    for b in branches {
        let name = format!("ground_weyl ({b:?})").to_lowercase();
        let st = &ground.branches[b.index()].state;
        let psi = match b {
            Branch::Plus => sys.join(st, &zero),
            Branch::Minus => sys.join(&zero, st),
        };
        let closed = ground_weyl(&field, b, &g, &quad)?;
        match expectation(&sys, &psi, &Observable::WeylDisplacement(g_vec.clone())) {
            Ok(v) => {
                let v = v.scalar().expect("scalar");
                rows.push(ValidationRow::compare(name, Number::of(closed), Number::of(v), (closed - v).norm(), tol));
            }
            Err(e) => rows.push(ValidationRow::failed(name, tol, &e)),
        }
    }

    // Time series from (0.8 |e> + 0.6 |g>) (x) vacuum.
    let w_min = modes.omegas[0];
    let times = match &task.times {
        Some(grid) => grid.samples()?,
        None => TimeGrid::Linear {
            start: 0.0,
            stop: 10.0 / w_min,
            count: 200,
        }
        .samples()?,
    };
    series_rows(&sys, &ground, &field, &g, &g_vec, &times, delta, dyn_tol, &mut rows)?;

    // Single-mode KMS states against the Gibbs state of the lowest mode.
    if !task.betas.is_empty() {
        let single = DiscreteModes::new(vec![modes.omegas[0]], vec![modes.couplings[0]])?;
        let sf = single.field();
        let g1 = TestFunction::discrete(vec![g_vec[0]]);
        let sys1 = crate::oracle::build_hamiltonian(&single, delta, task.thermal_n_max);
        let prop1 = sys1.as_ref().map_err(clone_error).and_then(Propagator::new);
        for &beta in &task.betas {
            for b in Branch::BOTH {
                let name = format!("kms_weyl (beta = {beta}, {b:?})").to_lowercase();
                let oracle = match (&sys1, &prop1) {
                    (Ok(s), Ok(p)) => gibbs_weyl(s, p, beta, Some(b), &[g_vec[0]]),
                    (Err(e), _) | (_, Err(e)) => Err(clone_error(e)),
                };
                let closed = kms_weyl(&sf, beta, b, &g1, &quad);
                rows.push(match (closed, oracle) {
                    (Ok(c), Ok(o)) => ValidationRow::compare(name, Number::of(c), Number::of(o), (c - o).norm(), tol),
                    (Err(e), _) | (_, Err(e)) => ValidationRow::failed(name, tol, &e),
                });
            }
        }
    }

    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ValidationReport {
        task: "validate",
        modes: modes.len(),
        n_max: Some(sys.n_max),
        convergence: sys.convergence.clone(),
        rows,
        all_pass,
    })
}

pub fn run_validate(cfg: &RunConfig, task: &ValidateTask, ctx: &RunContext) -> Result<RunOutcome> {
    let report = match validation_rows(cfg, task, &ctx.base_dir) {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Domain(_) | Error::Io { .. })) => return Err(as_config_error(e)),
        Err(e) => ValidationReport {
            task: "validate",
            modes: 0,
            n_max: None,
            convergence: Vec::new(),
            rows: vec![ValidationRow::failed("validation", task.tolerance, &e)],
            all_pass: false,
        },
    };
    let mut files = Vec::new();
    if ctx.wants(Format::Json) {
        ctx.write("validate.json", to_json(&report)?.as_bytes(), &mut files)?;
    }
    if ctx.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "closed_form", "oracle", "abs_diff", "tolerance", "pass", "cause"])?;
        for r in &report.rows {
            w.write_record([
                r.quantity.clone(),
                r.closed_form.map_or(String::new(), |n| n.text()),
                r.oracle.map_or(String::new(), |n| n.text()),
                r.abs_diff.map_or(String::new(), |d| d.to_string()),
                r.tolerance.to_string(),
                r.pass.to_string(),
                r.cause.clone().unwrap_or_default(),
            ])?;
        }
        let buf = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        ctx.write("validate.csv", &buf, &mut files)?;
    }
    let passed = report.rows.iter().filter(|r| r.pass).count();
    let mut summary = format!("{passed}/{} rows pass\n", report.rows.len());
    for r in report.rows.iter().filter(|r| !r.pass) {
        summary.push_str(&format!("FAIL {}: {}\n", r.quantity, r.cause.as_deref().unwrap_or("")));
    }
    Ok(RunOutcome {
        exit_code: if report.all_pass { EXIT_OK } else { EXIT_FAILED },
        files,
        summary,
    })
}
