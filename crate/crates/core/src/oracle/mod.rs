//! Truncated-Fock oracle: finitely many modes, bounded occupations, exact
//! linear algebra. Closed forms elsewhere in the crate are checked against it.

mod fixture;
pub mod linalg;
mod modes;
mod observables;
mod system;

pub use fixture::OracleFixture;
pub use modes::{discretize, DiscreteModes, DiscretizationMeta, Strategy, TAIL_MASS_LIMIT};
pub use observables::{
    apply_weyl_field, check_truncation, expectation, gibbs_branch_weights, gibbs_weyl, mode_weyl,
    number_distribution, occupation_stats, Expectation, Observable,
};
pub use system::{
    build_hamiltonian, build_with_budget, converged_system, converged_with_budget, default_start,
    ground_state, BranchGround, GroundState, NmaxPolicy, OracleSystem, Propagator, DEFAULT_BUDGET,
    DENSE_LIMIT,
};
