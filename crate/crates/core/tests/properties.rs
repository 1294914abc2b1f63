//! Deterministic property checks. Sample points come from additive
//! recurrences (golden ratio, plastic number), so every run sees the same inputs.

use num_complex::Complex64 as C;

use udw::diagnostics::{ir_exponent, r_integral, DiagnosticSettings, Region};
use udw::dynamics::{amplitude_factor, evolve_observable, state_expectation, EvolvedWeylObservable, Gapless, StateSpec};
use udw::oracle::DiscreteModes;
use udw::thermal::{coth_pairing, joint_thermal, kms_weyl};
use udw::{Axis, Branch, CouplingFunction, ModeSpace, QuadratureConfig, QubitState, SpatialProfile, TestFunction};

const PHI: f64 = 0.618_033_988_749_894_9;

fn golden(i: usize) -> f64 {
    (0.5 + PHI * i as f64).fract()
}

fn golden2(i: usize) -> [f64; 2] {
    let g = 1.324_717_957_244_746_f64;
    [(0.5 + i as f64 / g).fract(), (0.5 + i as f64 / (g * g)).fract()]
}

fn gaussian(n: usize, mass: Option<f64>) -> CouplingFunction {
    let space = match mass {
        Some(m) => ModeSpace::massive(n, m).unwrap(),
        None => ModeSpace::massless(n).unwrap(),
    };
    CouplingFunction::new(space, SpatialProfile::gaussian(1.0).unwrap(), 1.0).unwrap()
}

fn modes() -> DiscreteModes {
    DiscreteModes::real(&[0.8, 1.1, 1.7], &[0.25, -0.2, 0.15]).unwrap()
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn amplitude_factor_bounds() {
    for i in 0..500 {
        let [u, v] = golden2(i);
        let (omega, t) = (1e-3 + 10.0 * u, 50.0 * v);
        let a = amplitude_factor(omega, t).norm();
        assert!(a <= t + 1e-12 && a <= 2.0 / omega + 1e-12, "omega={omega}, t={t}");
    }
    assert_eq!(amplitude_factor(0.0, 2.5), C::new(2.5, 0.0));
}

#[test]
fn kms_coherence_monotone_in_beta() {
    let field = modes().field();
    let q = QuadratureConfig::default();
    let g = TestFunction::discrete(vec![C::new(0.4, 0.1), C::new(-0.2, 0.3), C::new(0.1, 0.0)]);
    let betas: Vec<f64> = (0..40).map(|i| 0.05 * 1.2f64.powi(i)).collect();
    let pairings: Vec<f64> = betas.iter().map(|&b| coth_pairing(&field, b, &g, &q).unwrap()).collect();
    for w in pairings.windows(2) {
        assert!(w[1] <= w[0], "coth pairing must not grow with beta");
    }
    let moduli: Vec<f64> =
        betas.iter().map(|&b| kms_weyl(&field, b, Branch::Plus, &g, &q).unwrap().norm()).collect();
    for w in moduli.windows(2) {
        assert!(w[1] >= w[0]);
    }
}

#[test]
fn thermal_weights_monotone_and_normalised() {
    let mut last = 0.5;
    for i in 1..60 {
        let beta = 0.1 * i as f64;
        let w = joint_thermal(beta, 0.7).unwrap();
        assert!((w.plus + w.minus - 1.0).abs() < 1e-15);
        assert!(w.minus >= last - 1e-15);
        last = w.minus;
    }
}

/// `R_1^2 <= R_0 R_2` (Cauchy-Schwarz on the same measure).
#[test]
fn r_integral_chain() {
    let s = DiagnosticSettings::default();
    for i in 0..6 {
        let mass = 0.2 + 2.0 * golden(i);
        for n in [1, 2, 3] {
            let c = gaussian(n, Some(mass));
            let r = |j| r_integral(&c, j, Region::Full, &s).unwrap().value().unwrap();
            let (r0, r1, r2) = (r(0), r(1), r(2));
            assert!(r1 * r1 <= r0 * r2 * (1.0 + 1e-9), "n={n}, mass={mass}");
        }
    }
}

#[test]
fn heisenberg_group_law() {
    let m = modes();
    let field = m.field();
    let q = QuadratureConfig::default();
    let model = Gapless::with_delta(0.4).unwrap();
    let g = TestFunction::discrete(vec![C::new(0.3, -0.1), C::new(0.2, 0.2), C::new(-0.1, 0.4)]);
    let state = StateSpec::ProductInitial {
        qubit: QubitState::pure_z(C::new(0.8, 0.0), C::new(0.0, 0.6)).unwrap(),
        field: Box::new(StateSpec::Coherent(TestFunction::discrete(vec![C::new(0.1, 0.2); 3]))),
    };
    for obs in [EvolvedWeylObservable::weyl(&g), EvolvedWeylObservable::sigma(&field, Axis::Y)] {
        for i in 0..20 {
            let [u, v] = golden2(i);
            let (t, s) = (8.0 * u - 2.0, 8.0 * v - 2.0);
            let two = evolve_observable(&field, &evolve_observable(&field, &obs, t, &model, &q).unwrap(), s, &model, &q)
                .unwrap();
            let one = evolve_observable(&field, &obs, t + s, &model, &q).unwrap();
            let a = state_expectation(&field, &state, &two, &q).unwrap();
            let b = state_expectation(&field, &state, &one, &q).unwrap();
            assert!(close(a, b, 1e-12), "t={t}, s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn adjoint_conjugates_expectations() {
    let m = modes();
    let field = m.field();
    let q = QuadratureConfig::default();
    let model = Gapless::with_delta(0.25).unwrap();
    let g = TestFunction::discrete(vec![C::new(0.5, 0.1), C::new(0.0, -0.3), C::new(0.2, 0.2)]);
    let states = [
        StateSpec::Vacuum,
        StateSpec::JointGround(Branch::Minus),
        StateSpec::JointThermal { beta: 1.3, delta: 0.25 },
        StateSpec::Kms { beta: 2.0, branch: Branch::Plus },
    ];
    for t in [0.0, 1.7, 9.2] {
        for obs in [EvolvedWeylObservable::weyl(&g), EvolvedWeylObservable::sigma(&field, Axis::Y)] {
            let o = evolve_observable(&field, &obs, t, &model, &q).unwrap();
            let dag = o.adjoint(&field).unwrap();
            for st in &states {
                let a = state_expectation(&field, st, &o, &q).unwrap();
                let b = state_expectation(&field, st, &dag, &q).unwrap();
                assert!(close(a, b.conj(), 1e-12), "t={t}: {a} vs {b}");
            }
        }
        let x = evolve_observable(&field, &EvolvedWeylObservable::sigma(&field, Axis::X), t, &model, &q).unwrap();
        let v = state_expectation(&field, &StateSpec::JointThermal { beta: 0.8, delta: 0.25 }, &x, &q).unwrap();
        assert!(v.im.abs() < 1e-14);
    }
}

#[test]
fn coupling_sign_flip_leaves_scalars() {
    let s = DiagnosticSettings::default();
    let c = gaussian(3, Some(0.5));
    let flipped = c.with_lambda(-1.0);
    for j in [0, 1, 2] {
        let a = r_integral(&c, j, Region::Full, &s).unwrap().value();
        let b = r_integral(&flipped, j, Region::Full, &s).unwrap().value();
        assert_eq!(a, b);
    }
}

/// The massless Gaussian in four dimensions has an integrable R_2 at k -> 0.
#[test]
fn four_dimensional_r2_is_finite() {
    let s = DiagnosticSettings::default();
    let c = gaussian(4, None);
    let fit = ir_exponent(&c, 2, &s).unwrap();
    assert!(fit.exponent.abs() < 0.05, "{}", fit.exponent);
    let r2 = r_integral(&c, 2, Region::Full, &s).unwrap();
    let v = r2.value().expect("finite");
    // 2 pi^2 k^3 |F|^2 / k^2 with |F|^2 = e^{-k^2} / (2 k (2 pi)^4).
    let exact = 2.0 * std::f64::consts::PI.powi(2) / (2.0 * (2.0 * std::f64::consts::PI).powi(4)) * 0.5 * std::f64::consts::PI.sqrt();
    assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
}
