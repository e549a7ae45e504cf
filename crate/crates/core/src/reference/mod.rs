//! Independent reference implementations used to validate the collocation
//! solver: an adaptive Runge–Kutta propagator, a single-shooting
//! differential corrector, and a universal-variable two-body solver.

pub mod lambert;
pub mod propagate;
pub mod shooting;

pub use lambert::lambert_universal;
pub use propagate::{
    finite_diff_stm, propagate, propagate_dense, specific_energy, PropagatorConfig, Trajectory,
};
pub use shooting::{dc_solve, DcProblem, DcSolution};
