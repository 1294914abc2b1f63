//! Local power-law exponents of radial integrands from dyadic window means.
//!
//! A block of `windows` consecutive octaves is slid towards the end of
//! interest (k -> 0 for the infrared, k -> infinity for the ultraviolet) until
//! the log-log means of the integrand over each octave lie on a straight line.
//! The least-squares slope of that block is the local exponent.

use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FitSettings {
    pub windows: usize,
    /// Maximum number of octaves the block may slide.
    pub max_shift: usize,
    /// RMS residual (natural-log units) below which a block counts as a power law.
    pub residual_tol: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            windows: 12,
            max_shift: 48,
            residual_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    /// `+inf` for an integrand that vanishes identically near the end,
    /// `-inf` for one that is superpolynomially small there.
    pub exponent: f64,
    pub residual: f64,
    /// Octaves the block was shifted away from the starting scale.
    pub shift: usize,
    /// Geometric window centres and window means actually used.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitFailure {
    /// No block within the allowed range looked like a power law.
    NotPowerLaw { best_residual: f64, last_slope: f64 },
    /// The admissible k-range holds fewer octaves than one block needs.
    TooFewWindows { available: usize },
    Quadrature { window: (f64, f64) },
}

fn window_mean(f: &impl Fn(f64) -> f64, a: f64, b: f64, quad: &QuadratureConfig) -> Option<f64> {
    // Coarser than the global tolerance; the fit itself only needs ~1e-6.
    let q = QuadratureConfig {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_panels: 2_000,
        ..*quad
    };
    q.finite(|k| f(k).abs(), a, b).ok().map(|e| e.value / (b - a))
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

fn fit(
    f: &impl Fn(f64) -> f64,
    start: f64,
    limit: f64,
    dir: Direction,
    settings: &FitSettings,
    quad: &QuadratureConfig,
) -> Result<PowerLawFit, FitFailure> {
    let w = settings.windows;
    // Octave edges: octave m covers [start 2^-(m+1), start 2^-m] going down,
    // or [start 2^m, start 2^(m+1)] going up.
    let edge = |m: usize| -> (f64, f64) {
        match dir {
            Direction::Down => (start * 0.5f64.powi(m as i32 + 1), start * 0.5f64.powi(m as i32)),
            Direction::Up => (start * 2f64.powi(m as i32), start * 2f64.powi(m as i32 + 1)),
        }
    };
    let admissible = |m: usize| -> bool {
        let (a, b) = edge(m);
        match dir {
            Direction::Down => a >= limit,
            Direction::Up => b <= limit,
        }
    };
    let available = (0..w + settings.max_shift).take_while(|&m| admissible(m)).count();
    if available < w.min(4).max(2) {
        return Err(FitFailure::TooFewWindows { available });
    }
    let block = w.min(available);

    let mut means: Vec<(f64, f64)> = Vec::with_capacity(available);
    for m in 0..available {
        let (a, b) = edge(m);
        let v = window_mean(f, a, b, quad).ok_or(FitFailure::Quadrature { window: (a, b) })?;
        means.push(((a * b).sqrt(), v));
    }

    let mut best_residual = f64::INFINITY;
    let mut last_slope = f64::NAN;
    for shift in 0..=(available - block) {
        let samples = &means[shift..shift + block];
        let zeros = samples.iter().filter(|(_, v)| *v == 0.0).count();
        if zeros == block {
            let exponent = match dir {
                Direction::Down => f64::INFINITY,
                Direction::Up => f64::NEG_INFINITY,
            };
            return Ok(PowerLawFit {
                exponent,
                residual: 0.0,
                shift,
                samples: samples.to_vec(),
            });
        }
        if zeros > 0 {
            continue;
        }
        let xs: Vec<f64> = samples.iter().map(|(k, _)| k.ln()).collect();
        let ys: Vec<f64> = samples.iter().map(|(_, v)| v.ln()).collect();
        let (slope, rms) = least_squares(&xs, &ys);
        last_slope = slope;
        best_residual = best_residual.min(rms);
        if rms <= settings.residual_tol {
            return Ok(PowerLawFit {
                exponent: slope,
                residual: rms,
                shift,
                samples: samples.to_vec(),
            });
        }
        // Superpolynomial decay never settles into a line; once the last
        // octaves fall off faster than any relevant power, report -inf.
        if dir == Direction::Up {
            let n = samples.len();
            let (k1, v1) = samples[n - 2];
            let (k2, v2) = samples[n - 1];
            let tail = (v2 / v1).ln() / (k2 / k1).ln();
            if tail < -8.0 {
                return Ok(PowerLawFit {
                    exponent: f64::NEG_INFINITY,
                    residual: rms,
                    shift,
                    samples: samples.to_vec(),
                });
            }
        }
    }
    Err(FitFailure::NotPowerLaw {
        best_residual,
        last_slope,
    })
}

/// Exponent of `f(k) ~ k^p` as `k -> 0`, descending from `start` but never
/// below `floor`.
pub fn infrared_exponent(
    f: impl Fn(f64) -> f64,
    start: f64,
    floor: f64,
    settings: &FitSettings,
    quad: &QuadratureConfig,
) -> Result<PowerLawFit, FitFailure> {
    fit(&f, start, floor, Direction::Down, settings, quad)
}

/// Exponent of `f(k) ~ k^p` as `k -> infinity`, ascending from `start` but
/// never beyond `ceiling`.
pub fn ultraviolet_exponent(
    f: impl Fn(f64) -> f64,
    start: f64,
    ceiling: f64,
    settings: &FitSettings,
    quad: &QuadratureConfig,
) -> Result<PowerLawFit, FitFailure> {
    fit(&f, start, ceiling, Direction::Up, settings, quad)
}
