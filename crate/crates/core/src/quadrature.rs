//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Panels are bisected in order of decreasing error estimate until the total
//! error drops below `max(abs_tol, rel_tol * |I|)`. Semi-infinite ranges are
//! mapped onto `[-1, 1)` with `k = a + s (1 + u) / (1 - u)`. Final sums run
//! over panels sorted by their left endpoint, so results do not depend on the
//! order in which panels were refined.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Scalar types the integrator can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisections allowed beyond the initial partition.
    pub max_panels: usize,
    /// Length scale `s` of the semi-infinite map.
    pub tail_scale: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_panels: 10_000,
            tail_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureFailure {
    /// Panel budget exhausted, or only roundoff-limited panels remain.
    NotConverged { value: f64, error: f64, panels: usize },
    /// The integrand returned NaN or an infinity.
    NonFinite { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Infinite,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    splittable: bool,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Splittable panels first, then by error, ties broken by position.
        self.splittable
            .cmp(&other.splittable)
            .then(self.error.total_cmp(&other.error))
            .then(other.a.total_cmp(&self.a))
    }
}

fn rule<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> Result<(T, f64), QuadratureFailure> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<T, QuadratureFailure> {
        let v = f(x);
        if v.magnitude().is_finite() {
            Ok(v)
        } else {
            Err(QuadratureFailure::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [T::default(); 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }

    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).magnitude() + (fv[2 * j + 1] - mean).magnitude());
    }
    let abs_half = half.abs();
    let res_asc = asc * abs_half;
    let value = kronrod * half;
    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let res_abs = value.magnitude();
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_tail_scale(mut self, scale: f64) -> Self {
        self.tail_scale = scale;
        self
    }

    /// Integrates `f` over `[lower, upper]`, splitting first at every
    /// breakpoint strictly inside the range.
    pub fn integrate<T, F>(
        &self,
        f: F,
        lower: f64,
        upper: Upper,
        breaks: &[f64],
    ) -> Result<Estimate<T>, QuadratureFailure>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        match upper {
            Upper::Finite(b) => {
                if b == lower {
                    return Ok(Estimate {
                        value: T::default(),
                        error: 0.0,
                        panels: 0,
                    });
                }
                let (lo, hi, sign) = if b > lower { (lower, b, 1.0) } else { (b, lower, -1.0) };
                let mut nodes = vec![lo];
                nodes.extend(sorted_interior(breaks, lo, hi));
                nodes.push(hi);
                let est = self.adapt(&f, &nodes)?;
                Ok(Estimate {
                    value: est.value * sign,
                    ..est
                })
            }
            Upper::Infinite => {
                let s = self.tail_scale;
                let to_u = |k: f64| (k - lower - s) / (k - lower + s);
                let mapped = |u: f64| -> T {
                    let one_minus = 1.0 - u;
                    let k = lower + s * (1.0 + u) / one_minus;
                    let jac = 2.0 * s / (one_minus * one_minus);
                    if !k.is_finite() {
                        return T::default();
                    }
                    let v = f(k);
                    if v.magnitude() == 0.0 {
                        T::default()
                    } else {
                        v * jac
                    }
                };
                let mut nodes = vec![-1.0];
                let interior: Vec<f64> = sorted_interior(breaks, lower, f64::INFINITY)
                    .into_iter()
                    .map(to_u)
                    .collect();
                nodes.extend(interior);
                nodes.push(1.0);
                nodes.dedup();
                self.adapt(&mapped, &nodes)
            }
        }
    }

    /// Convenience wrapper for `[a, b]` without breakpoints.
    pub fn finite<T: QuadValue, F: Fn(f64) -> T>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate<T>, QuadratureFailure> {
        self.integrate(f, a, Upper::Finite(b), &[])
    }

    fn adapt<T: QuadValue>(
        &self,
        f: &impl Fn(f64) -> T,
        nodes: &[f64],
    ) -> Result<Estimate<T>, QuadratureFailure> {
        let mut heap = BinaryHeap::with_capacity(nodes.len() + 16);
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let (value, error) = rule(f, a, b)?;
            heap.push(Panel {
                a,
                b,
                value,
                error,
                splittable: splittable(a, b),
            });
        }
        let initial = heap.len();
        let mut splits = 0usize;

        loop {
            let (total, err) = totals(&heap);
            let tol = self.abs_tol.max(self.rel_tol * total.magnitude());
            if err <= tol {
                return Ok(finish(heap));
            }
            let worst_splittable = heap.peek().map(|p| p.splittable).unwrap_or(false);
            if !worst_splittable || splits >= self.max_panels {
                return Err(QuadratureFailure::NotConverged {
                    value: total.magnitude(),
                    error: err,
                    panels: initial + splits,
                });
            }
            let p = heap.pop().expect("non-empty heap");
            let mid = 0.5 * (p.a + p.b);
            for (a, b) in [(p.a, mid), (mid, p.b)] {
                let (value, error) = rule(f, a, b)?;
                heap.push(Panel {
                    a,
                    b,
                    value,
                    error,
                    splittable: splittable(a, b),
                });
            }
            splits += 1;
        }
    }
}

fn splittable(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (b - a) > 1e3 * f64::EPSILON * scale
}

fn sorted_interior(breaks: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn totals<T: QuadValue>(heap: &BinaryHeap<Panel<T>>) -> (T, f64) {
    // Refinement decisions only; the returned estimate is re-summed in order.
    heap.iter()
        .fold((T::default(), 0.0), |(v, e), p| (v + p.value, e + p.error))
}

fn finish<T: QuadValue>(heap: BinaryHeap<Panel<T>>) -> Estimate<T> {
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = T::default();
    let mut error = 0.0;
    for p in &panels {
        value = value + p.value;
        error += p.error;
    }
    Estimate {
        value,
        error,
        panels: panels.len(),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
