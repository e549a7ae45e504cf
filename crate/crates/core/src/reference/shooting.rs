//! Single-shooting differential corrections on the full perturbed dynamics.
//!
//! Newton iteration on the initial velocity: propagate, measure the terminal
//! position miss, correct through the numerically estimated state transition
//! sensitivity `∂r_f/∂v_0`. Independent of the collocation machinery, so it
//! serves as the perturbed-dynamics oracle.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::reference::lambert::lambert_universal;
use crate::reference::propagate::{finite_diff_stm, propagate, PropagatorConfig};
use crate::tfc::BoundaryValueProblem;

/// A shooting setup: the boundary-value problem plus iteration controls.
pub struct DcProblem {
    /// Problem geometry, dynamics, and time of flight.
    pub bvp: BoundaryValueProblem,
    /// Starting velocity (same units as the problem). When absent, the
    /// unperturbed universal-variable solution seeds the iteration.
    pub guess_v0: Option<Vector3<f64>>,
    /// Convergence threshold on the nondimensional terminal miss distance.
    pub tol: f64,
    /// Newton iteration budget.
    pub max_iter: usize,
    /// Integrator settings used for every propagation.
    pub propagator: PropagatorConfig,
}

impl DcProblem {
    /// Shooting setup with the default tolerances (miss below `1e-9`
    /// nondimensional within 50 iterations).
    pub fn new(bvp: BoundaryValueProblem) -> Self {
        Self {
            bvp,
            guess_v0: None,
            tol: 1e-9,
            max_iter: 50,
            propagator: PropagatorConfig::default(),
        }
    }

    /// Replaces the seed velocity.
    pub fn with_guess(mut self, v0: Vector3<f64>) -> Self {
        self.guess_v0 = Some(v0);
        self
    }
}

/// Converged (or exhausted) shooting result, in the problem's input units.
#[derive(Clone, Debug)]
pub struct DcSolution {
    /// Departure velocity.
    pub v0: Vector3<f64>,
    /// Arrival velocity.
    pub vf: Vector3<f64>,
    /// Newton iterations performed.
    pub iterations: usize,
    /// Whether the miss distance fell below tolerance.
    pub converged: bool,
    /// Final nondimensional terminal position miss.
    pub miss_distance: f64,
    /// Miss distance after each iteration.
    pub history: Vec<f64>,
}

/// Solves the boundary-value problem by single shooting.
///
/// Works in nondimensional units internally. Returns the solution even when
/// the iteration budget runs out (`converged == false`); hard failures —
/// a propagation breakdown or a singular sensitivity matrix — are errors.
pub fn dc_solve(problem: &DcProblem) -> Result<DcSolution> {
    if !(problem.tol > 0.0) || !problem.tol.is_finite() {
        return Err(Error::InvalidArgument("tolerance must be positive"));
    }
    if problem.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "iteration budget must be at least one",
        ));
    }
    let (nd, scaling) = problem.bvp.nondimensionalized();
    let models = nd.perturbations.as_slice();

    let mut v0 = match problem.guess_v0 {
        Some(v) => v / scaling.velocity(),
        None => {
            let (v, _) =
                lambert_universal(nd.mu, &nd.r0, &nd.rf, nd.tof, nd.long_way)?;
            v
        }
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut history = Vec::new();
    let (r_end, mut v_end) =
        propagate(nd.mu, &nd.r0, &v0, nd.tof, models, &problem.propagator)?;
    let mut miss_vec = r_end - nd.rf;
    let mut miss = miss_vec.norm();
    history.push(miss);

    while iterations < problem.max_iter {
        if miss <= problem.tol {
            converged = true;
            break;
        }
        if !miss.is_finite() {
            break;
        }
        let stm = finite_diff_stm(nd.mu, &nd.r0, &v0, nd.tof, models, &problem.propagator)?;
        let lu = Matrix3::from(stm).lu();
        let delta = lu
            .solve(&miss_vec)
            .ok_or(Error::SingularGeometry)?;
        v0 -= delta;
        iterations += 1;
        let (r_end, v) = propagate(nd.mu, &nd.r0, &v0, nd.tof, models, &problem.propagator)?;
        v_end = v;
        miss_vec = r_end - nd.rf;
        miss = miss_vec.norm();
        history.push(miss);
    }
    if miss <= problem.tol {
        converged = true;
    }

    Ok(DcSolution {
        v0: v0 * scaling.velocity(),
        vf: v_end * scaling.velocity(),
        iterations,
        converged,
        miss_distance: miss,
        history,
    })
}
