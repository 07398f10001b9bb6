//! Numerical toolkit for the saturated two-component nonlinear Schrödinger system
//!
//! ```text
//! -Δu + λ₁u = αu(αu² + βv²)/(1 + s(αu² + βv²))
//! -Δv + λ₂v = βv(αu² + βv²)/(1 + s(αu² + βv²))
//! ```
//!
//! for radially symmetric solutions in dimensions 1, 2 and 3.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bifurcation;
pub mod continuation;
pub mod energy;
pub mod error;
pub mod ground_state;
pub mod linalg;
pub mod model;
pub mod numerics;
pub mod spectrum;

pub use bifurcation::{
    check_corollary1, check_corollary2, count_nodes, default_s_grid, find_bifurcation_points, log_spaced,
    positivity_constraint, BifurcationPoint, CrossingSearch, NodeCount, PositivityKind, PositivityVerdict,
    DEFAULT_TAIL_THRESHOLD,
};
pub use continuation::{
    continue_both, continue_branch, jacobian, newton_solve, solution_norms, BlockJacobian, Branch, BranchPoint,
    ContinuationConfig, NewtonOutcome, Termination,
};
pub use energy::{
    energy_is, fibering_maximize, nehari_h, semitrivial_levels, verify_semitrivial_groundstate, EnergyReport, Fibering,
    SemitrivialLevels,
};
pub use error::{Error, Result};
pub use ground_state::{
    discrete_ground_state, ground_state, ground_state_1d, ground_state_radial, peak_amplitude_1d, ScalarProblem,
};
pub use model::{
    intensity_z, residual, residual_sup_norm, saturation_g, Params, RadialGrid, RadialProfile, RadialStencil,
    StatePair, DECAY_MARGIN,
};
pub use spectrum::{
    box_potential, box_potential_eigen, eigen_curves, eigenvalue_list, eigenvalues_l, mu_bar, mu_bar_closed_form,
    mu_bar_on, mu_limit_saturation, node_law_holds, potential_ws, semitrivial_profile, CurveSample, Potential,
    Spectrum,
};
