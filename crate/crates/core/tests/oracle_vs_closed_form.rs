use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C;

use udw::dynamics::{evolve_weyl, reduced_qubit, state_expectation, Gapless, StateSpec};
use udw::oracle::{
    build_hamiltonian, converged_system, discretize, expectation, ground_state, DiscreteModes, NmaxPolicy,
    Observable, Propagator, Strategy,
};
use udw::thermal::{ground_weyl, joint_ground_weyl};
use udw::{Branch, CouplingFunction, ModeSpace, QuadratureConfig, QubitState, SpatialProfile, TestFunction};

fn two_modes() -> DiscreteModes {
    DiscreteModes::real(&[0.9, 1.6], &[0.3, -0.2]).unwrap()
}

#[test]
fn vacuum_weyl_is_gaussian() {
    let modes = two_modes().scaled(0.0);
    let sys = build_hamiltonian(&modes, 0.0, 24).unwrap();
    let psi = sys.product_with_vacuum([C::new(1.0, 0.0), C::new(0.0, 0.0)]);
    let g = vec![C::new(0.4, -0.3), C::new(0.2, 0.5)];
    let w = expectation(&sys, &psi, &Observable::WeylDisplacement(g.clone())).unwrap().scalar().unwrap();
    let norm2: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    assert_abs_diff_eq!(w.re, (-norm2 / 2.0).exp(), epsilon = 1e-8);
    assert_abs_diff_eq!(w.im, 0.0, epsilon = 1e-8);
}

#[test]
fn ground_state_number_and_weyl() {
    let modes = two_modes();
    let q = QuadratureConfig::default();
    let (sys, ground) = converged_system(&modes, 0.3, NmaxPolicy::default()).unwrap();
    let n = expectation(&sys, &ground.state, &Observable::NumberTotal).unwrap().scalar().unwrap();
    assert_abs_diff_eq!(n.re, modes.dressing_number(), epsilon = 1e-8);

    let g = vec![C::new(0.3, 0.1), C::new(-0.2, 0.25)];
    let gt = TestFunction::discrete(g.clone());
    let oracle = expectation(&sys, &ground.state, &Observable::WeylDisplacement(g)).unwrap().scalar().unwrap();
    let closed = joint_ground_weyl(&modes.field(), 0.3, &gt, &q).unwrap();
    assert!((oracle - closed).norm() < 1e-8, "{oracle} vs {closed}");
    assert_eq!(ground.branch, Branch::Minus);
}

#[test]
fn branch_ground_states_at_zero_splitting() {
    let modes = two_modes();
    let q = QuadratureConfig::default();
    let sys = build_hamiltonian(&modes, 0.0, 14).unwrap();
    let ground = ground_state(&sys).unwrap();
    let g = vec![C::new(0.5, 0.0), C::new(0.0, 0.4)];
    let gt = TestFunction::discrete(g.clone());
    for b in Branch::BOTH {
        let field_state = &ground.branches[b.index()].state;
        let psi = match b {
            Branch::Plus => sys.join(field_state, &vec![C::new(0.0, 0.0); sys.field_dim()]),
            Branch::Minus => sys.join(&vec![C::new(0.0, 0.0); sys.field_dim()], field_state),
        };
        let oracle = expectation(&sys, &psi, &Observable::WeylDisplacement(g.clone())).unwrap().scalar().unwrap();
        let closed = ground_weyl(&modes.field(), b, &gt, &q).unwrap();
        assert!((oracle - closed).norm() < 1e-8, "{b:?}: {oracle} vs {closed}");
    }
}

#[test]
fn entropy_from_ground_qubit_two_modes() {
    let modes = two_modes();
    let q = QuadratureConfig::default();
    let model = Gapless::with_delta(0.3).unwrap();
    let sys = build_hamiltonian(&modes, 0.3, 12).unwrap();
    let prop = Propagator::new(&sys).unwrap();
    let psi0 = sys.product_with_vacuum([C::new(0.0, 0.0), C::new(1.0, 0.0)]);
    let psi = prop.evolve(&sys, &psi0, 2.3).unwrap();
    let rho = expectation(&sys, &psi, &Observable::QubitReduced).unwrap().matrix().unwrap();
    let state = StateSpec::ProductInitial {
        qubit: QubitState::pure_z(C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap(),
        field: Box::new(StateSpec::Vacuum),
    };
    let closed = reduced_qubit(&modes.field(), &state, 2.3, &model, &q).unwrap();
    assert_abs_diff_eq!(closed.entropy, udw::qubit::entropy(&rho), epsilon = 1e-6);
}

#[test]
fn evolution_is_unitary_and_composes() {
    let sys = build_hamiltonian(&two_modes(), 0.3, 10).unwrap();
    let prop = Propagator::new(&sys).unwrap();
    let psi0 = sys.product_with_vacuum([C::new(0.6, 0.0), C::new(0.0, 0.8)]);
    let a = prop.evolve(&sys, &prop.evolve(&sys, &psi0, 1.1).unwrap(), 2.4).unwrap();
    let b = prop.evolve(&sys, &psi0, 3.5).unwrap();
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let norm: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    assert!(diff < 1e-12, "{diff}");
    assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    assert_eq!(prop.evolve(&sys, &psi0, 0.0).unwrap(), psi0);
}

#[test]
fn discretized_continuum_weyl_series() {
    let c = CouplingFunction::new(ModeSpace::massive(3, 1.0).unwrap(), SpatialProfile::gaussian(1.0).unwrap(), 2.0)
        .unwrap();
    let modes = discretize(&c, 2, Strategy::GaussPanels { k_max: 5.0 }).unwrap();
    let field = modes.field();
    let q = QuadratureConfig::default();
    let model = Gapless::with_delta(0.2).unwrap();
    let (sys, ground) = converged_system(&modes, 0.2, NmaxPolicy::default()).unwrap();
    let prop = Propagator::from_ground(&sys, &ground).unwrap();
    let (a, b) = (C::new(0.8, 0.0), C::new(0.6, 0.0));
    let psi0 = sys.product_with_vacuum([a, b]);
    let state = StateSpec::ProductInitial {
        qubit: QubitState::pure_z(a, b).unwrap(),
        field: Box::new(StateSpec::Vacuum),
    };
    let g = vec![C::new(0.2, 0.1), C::new(-0.3, 0.2)];
    let gt = TestFunction::discrete(g.clone());
    for t in [0.0, 0.9, 2.7, 6.1] {
        let psi = prop.evolve(&sys, &psi0, t).unwrap();
        let oracle = expectation(&sys, &psi, &Observable::WeylDisplacement(g.clone())).unwrap().scalar().unwrap();
        let obs = evolve_weyl(&field, &gt, t, &model, &q).unwrap();
        let closed = state_expectation(&field, &state, &obs, &q).unwrap();
        assert!((oracle - closed).norm() < 1e-8, "t={t}: {oracle} vs {closed}");
    }
}
