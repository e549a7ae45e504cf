//! Problem statement, constrained functionals, and the collocation solver.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::perturbations::{PerturbationModel, ScaledModel};

pub mod functionals;
pub mod geometry;
pub mod solver;

pub use functionals::{
    reconstruct_state, CartesianState, Coefficients, Functionals, PartialRows, VariableState,
};
pub use geometry::{build_frame, mean_frequency, Scaling, TransferFrame, GEOMETRY_TOLERANCE};
pub use solver::{
    sample_solution, solve, warm_start_fit, CollocationSystem, Diagnostics, Solution,
    SolverConfig, StopReason,
};

/// Two-point boundary-value problem: connect `r0` to `rf` in time `tof`
/// under a central gravity field `μ` plus optional perturbations, sweeping
/// the short or long way with a given number of extra full revolutions.
#[derive(Clone)]
pub struct BoundaryValueProblem {
    pub mu: f64,
    pub r0: Vector3<f64>,
    pub rf: Vector3<f64>,
    pub tof: f64,
    pub revolutions: u32,
    pub long_way: bool,
    pub perturbations: Vec<Arc<dyn PerturbationModel>>,
}

impl core::fmt::Debug for BoundaryValueProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BoundaryValueProblem")
            .field("mu", &self.mu)
            .field("r0", &self.r0)
            .field("rf", &self.rf)
            .field("tof", &self.tof)
            .field("revolutions", &self.revolutions)
            .field("long_way", &self.long_way)
            .field("perturbations", &self.perturbations.len())
            .finish()
    }
}

impl BoundaryValueProblem {
    /// Validates the geometry (boundary vectors must span a plane), the
    /// gravitational parameter, and the time of flight.
    pub fn new(mu: f64, r0: Vector3<f64>, rf: Vector3<f64>, tof: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(
                "gravitational parameter must be positive and finite",
            ));
        }
        if !(tof > 0.0) || !tof.is_finite() {
            return Err(Error::InvalidArgument("time of flight must be positive"));
        }
        // Fails on zero-length or collinear boundary vectors.
        geometry::build_frame(&r0, &rf, false)?;
        Ok(Self {
            mu,
            r0,
            rf,
            tof,
            revolutions: 0,
            long_way: false,
            perturbations: Vec::new(),
        })
    }

    pub fn with_revolutions(mut self, revolutions: u32) -> Self {
        self.revolutions = revolutions;
        self
    }

    pub fn with_long_way(mut self, long_way: bool) -> Self {
        self.long_way = long_way;
        self
    }

    pub fn with_perturbation(mut self, model: impl PerturbationModel + 'static) -> Self {
        self.perturbations.push(Arc::new(model));
        self
    }

    /// Drops all perturbations; used to derive warm starts from the
    /// two-body version of a problem.
    pub fn unperturbed(&self) -> Self {
        let mut out = self.clone();
        out.perturbations.clear();
        out
    }

    /// Transfer frame for this problem's boundary vectors and direction.
    pub fn frame(&self) -> Result<geometry::TransferFrame> {
        geometry::build_frame(&self.r0, &self.rf, self.long_way)
    }

    /// Canonical scaling: departure radius and `μ` both become one.
    pub fn scaling(&self) -> Scaling {
        Scaling::canonical(self.r0.norm(), self.mu)
    }

    /// Returns the same problem in canonical units, with every perturbation
    /// wrapped so it converts units at the call boundary, plus the scaling
    /// needed to map results back.
    pub fn nondimensionalized(&self) -> (Self, Scaling) {
        let s = self.scaling();
        let mu = self.mu * s.time * s.time / (s.length * s.length * s.length);
        let perturbations = self
            .perturbations
            .iter()
            .map(|m| Arc::new(ScaledModel::new(m.clone(), s)) as Arc<dyn PerturbationModel>)
            .collect();
        (
            Self {
                mu,
                r0: self.r0 / s.length,
                rf: self.rf / s.length,
                tof: self.tof / s.time,
                revolutions: self.revolutions,
                long_way: self.long_way,
                perturbations,
            },
            s,
        )
    }
}

/// Evaluates the three constrained functionals for a problem at domain
/// point `z ∈ [-1, 1]`, with boundary values taken from the problem's
/// radii and the frame's sweep. The basis and the problem must be in the
/// same units.
pub fn eval_variables(
    xi: &Coefficients,
    bvp: &BoundaryValueProblem,
    frame: &geometry::TransferFrame,
    spec: &crate::basis::BasisSpec,
    z: f64,
) -> Result<VariableState> {
    if (spec.tof - bvp.tof).abs() > 1e-9 * bvp.tof {
        return Err(Error::InvalidArgument(
            "basis and problem disagree on the time of flight",
        ));
    }
    let funcs = Functionals::for_problem(
        spec.clone(),
        bvp.r0.norm(),
        bvp.rf.norm(),
        frame,
        bvp.revolutions,
    )?;
    funcs.eval(xi, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbations::J2Perturbation;
    use approx::assert_relative_eq;

    #[test]
    fn construction_validates() {
        let r0 = Vector3::new(7000.0, 0.0, 0.0);
        let rf = Vector3::new(0.0, 42164.0, 0.0);
        assert!(BoundaryValueProblem::new(398600.4418, r0, rf, 10000.0).is_ok());
        assert!(BoundaryValueProblem::new(0.0, r0, rf, 10000.0).is_err());
        assert!(BoundaryValueProblem::new(398600.4418, r0, rf, 0.0).is_err());
        assert!(BoundaryValueProblem::new(398600.4418, r0, r0 * 3.0, 1e4).is_err());
    }

    #[test]
    fn nondimensionalization_normalizes_and_wraps() {
        let bvp = BoundaryValueProblem::new(
            398600.4418,
            Vector3::new(8000.0, 0.0, 0.0),
            Vector3::new(0.0, 20000.0, 0.0),
            3600.0,
        )
        .unwrap()
        .with_perturbation(J2Perturbation::earth(398600.4418));
        let (nd, s) = bvp.nondimensionalized();
        assert_relative_eq!(nd.mu, 1.0, epsilon = 1e-14);
        assert_relative_eq!(nd.r0.norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(nd.rf.norm(), 20000.0 / 8000.0, epsilon = 1e-14);
        assert_relative_eq!(nd.tof, 3600.0 / s.time, epsilon = 1e-14);
        assert_eq!(nd.perturbations.len(), 1);
    }
}
