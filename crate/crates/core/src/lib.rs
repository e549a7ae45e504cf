//! Two-point boundary-value orbit transfer solver.
//!
//! Given two position vectors, a time of flight, and an optional set of
//! perturbing accelerations, this crate finds the connecting trajectory by
//! expressing the transfer in a rotating triad as three scalar unknowns —
//! an in-plane radius `p(t)`, a sweep angle `θ(t)`, and an out-of-plane
//! component `h(t)` — each written as a constrained functional that satisfies
//! the boundary conditions *identically* for any choice of free coefficients.
//! The dynamics residual is collocated at Chebyshev-Gauss-Lobatto nodes and
//! the coefficients are found by Gauss-Newton least squares, so boundary
//! enforcement is exact by construction and only the differential equation is
//! solved for.
//!
//! Modules:
//!
//! - [`basis`] — orthogonal polynomial families (Legendre, Chebyshev,
//!   Gegenbauer) with first and second derivatives, collocation nodes, and
//!   the mixed polynomial + trigonometric basis row used by the functionals.
//! - [`tfc`] — the transfer frame, constrained functionals, collocation
//!   residual/Jacobian, and the Gauss-Newton driver.
//! - [`perturbations`] — oblateness, third-body, and solar radiation pressure
//!   acceleration models with analytic position Jacobians.
//! - [`reference`](mod@reference) — independent cross-checks: an adaptive Runge-Kutta
//!   propagator with dense output, a differential-corrections shooter, and a
//!   universal-variable two-body solver.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! enables the standard library for host builds.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod basis;
pub mod error;
pub mod perturbations;
pub mod reference;
pub mod tfc;

pub use error::{Error, Result};
pub use tfc::{
    solve, BoundaryValueProblem, Coefficients, Scaling, Solution, SolverConfig, TransferFrame,
};
