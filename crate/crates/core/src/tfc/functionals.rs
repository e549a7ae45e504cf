//! Constrained functionals for the three transfer variables.
//!
//! Each scalar unknown is written as a free expansion plus first-order
//! switching terms that absorb the boundary conditions:
//!
//! ```text
//! p(t) = g_p(t) + (ΔT - t)/ΔT [p0 - g_p(0)] + t/ΔT [pf - g_p(ΔT)]
//! θ(t) = g_θ(t) - (ΔT - t)/ΔT  g_θ(0)       + t/ΔT [Θ  - g_θ(ΔT)]
//! h(t) = g_h(t) - (ΔT - t)/ΔT  g_h(0)       - t/ΔT  g_h(ΔT)
//! ```
//!
//! where `g(t) = s(z(t))·ξ` is a basis row contracted with free
//! coefficients. Whatever `ξ` is, `p(0) = p0`, `p(ΔT) = pf`, `θ(0) = 0`,
//! `θ(ΔT) = Θ`, and `h` vanishes at both ends: the boundary-value problem
//! is reduced to an unconstrained search over `ξ`.

use nalgebra::{DVector, Vector3};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::basis::{basis_rows, BasisRows, BasisSpec};
use crate::error::{Error, Result};
use crate::tfc::geometry::TransferFrame;

/// Free coefficients of the three expansions, each of length
/// `spec.len() = m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub xi_p: DVector<f64>,
    pub xi_theta: DVector<f64>,
    pub xi_h: DVector<f64>,
}

impl Coefficients {
    pub fn zeros(n: usize) -> Self {
        Self {
            xi_p: DVector::zeros(n),
            xi_theta: DVector::zeros(n),
            xi_h: DVector::zeros(n),
        }
    }

    /// Per-variable coefficient count.
    pub fn len(&self) -> usize {
        self.xi_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_p.is_empty()
    }

    pub fn is_consistent(&self) -> bool {
        self.xi_p.len() == self.xi_theta.len() && self.xi_p.len() == self.xi_h.len()
    }

    /// Concatenates into a single vector ordered `[ξ_p, ξ_θ, ξ_h]`.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.len();
        let mut out = DVector::zeros(3 * n);
        out.rows_mut(0, n).copy_from(&self.xi_p);
        out.rows_mut(n, n).copy_from(&self.xi_theta);
        out.rows_mut(2 * n, n).copy_from(&self.xi_h);
        out
    }

    /// Inverse of [`Coefficients::stacked`].
    pub fn from_stacked(v: &DVector<f64>) -> Result<Self> {
        if v.len() % 3 != 0 {
            return Err(Error::InvalidArgument(
                "stacked coefficient vector length must be divisible by 3",
            ));
        }
        let n = v.len() / 3;
        Ok(Self {
            xi_p: v.rows(0, n).into_owned(),
            xi_theta: v.rows(n, n).into_owned(),
            xi_h: v.rows(2 * n, n).into_owned(),
        })
    }

    /// Applies a Gauss-Newton step `ξ ← ξ - δ` given the stacked step.
    pub fn apply_step(&mut self, delta: &DVector<f64>) {
        let n = self.len();
        for i in 0..n {
            self.xi_p[i] -= delta[i];
            self.xi_theta[i] -= delta[n + i];
            self.xi_h[i] -= delta[2 * n + i];
        }
    }
}

/// The three transfer variables and their first two time derivatives at one
/// instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableState {
    pub p: f64,
    pub p_dot: f64,
    pub p_ddot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub theta_ddot: f64,
    pub h: f64,
    pub h_dot: f64,
    pub h_ddot: f64,
}

/// Inertial position, velocity, and acceleration reconstructed from a
/// [`VariableState`], plus the radius magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    pub a: Vector3<f64>,
    pub radius: f64,
}

/// Frame-local (`r̂0`, `t̂0`, `ĥ0` components) counterpart of
/// [`CartesianState`]; what the collocation residual works with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LocalState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    pub a: Vector3<f64>,
    pub radius: f64,
}

/// Evaluation context for the functionals: the basis plus the boundary
/// values they must interpolate.
#[derive(Debug, Clone, PartialEq)]
pub struct Functionals {
    pub spec: BasisSpec,
    /// Departure radius `p(0)`.
    pub p0: f64,
    /// Arrival radius `p(ΔT)`.
    pub pf: f64,
    /// Total swept angle `θ(ΔT)`, including full revolutions.
    pub theta_total: f64,
    /// Basis row at `z = -1` (values only; the switching terms need no
    /// endpoint derivatives).
    s_start: DVector<f64>,
    /// Basis row at `z = +1`.
    s_end: DVector<f64>,
}

impl Functionals {
    pub fn new(spec: BasisSpec, p0: f64, pf: f64, theta_total: f64) -> Result<Self> {
        if !(p0 > 0.0) || !(pf > 0.0) {
            return Err(Error::InvalidArgument(
                "boundary radii must be positive",
            ));
        }
        let s_start = basis_rows(&spec, -1.0)?.s;
        let s_end = basis_rows(&spec, 1.0)?.s;
        Ok(Self {
            spec,
            p0,
            pf,
            theta_total,
            s_start,
            s_end,
        })
    }

    /// Convenience constructor pulling the boundary values from a problem's
    /// radii and frame.
    pub fn for_problem(
        spec: BasisSpec,
        r0_norm: f64,
        rf_norm: f64,
        frame: &TransferFrame,
        revolutions: u32,
    ) -> Result<Self> {
        let theta_total =
            2.0 * core::f64::consts::PI * revolutions as f64 + frame.sweep_angle;
        Self::new(spec, r0_norm, rf_norm, theta_total)
    }

    /// Switching-function weights at time `t`: `w0 = (ΔT - t)/ΔT`,
    /// `w1 = t/ΔT`.
    fn weights(&self, t: f64) -> (f64, f64) {
        let dt = self.spec.tof;
        ((dt - t) / dt, t / dt)
    }

    /// Evaluates all three functionals (values and two derivatives) at
    /// domain point `z`, given pre-evaluated basis rows for that point.
    pub fn eval_with_rows(&self, xi: &Coefficients, rows: &BasisRows, z: f64) -> VariableState {
        let t = self.spec.time_of(z);
        let (w0, w1) = self.weights(t);
        let inv_dt = 1.0 / self.spec.tof;

        let gp = rows.s.dot(&xi.xi_p);
        let gp_start = self.s_start.dot(&xi.xi_p);
        let gp_end = self.s_end.dot(&xi.xi_p);
        let p_defect0 = self.p0 - gp_start;
        let p_defect1 = self.pf - gp_end;

        let gt = rows.s.dot(&xi.xi_theta);
        let gt_start = self.s_start.dot(&xi.xi_theta);
        let gt_end = self.s_end.dot(&xi.xi_theta);
        let t_defect1 = self.theta_total - gt_end;

        let gh = rows.s.dot(&xi.xi_h);
        let gh_start = self.s_start.dot(&xi.xi_h);
        let gh_end = self.s_end.dot(&xi.xi_h);

        VariableState {
            p: gp + w0 * p_defect0 + w1 * p_defect1,
            p_dot: rows.ds.dot(&xi.xi_p) + (p_defect1 - p_defect0) * inv_dt,
            p_ddot: rows.dds.dot(&xi.xi_p),
            theta: gt - w0 * gt_start + w1 * t_defect1,
            theta_dot: rows.ds.dot(&xi.xi_theta) + (gt_start + t_defect1) * inv_dt,
            theta_ddot: rows.dds.dot(&xi.xi_theta),
            h: gh - w0 * gh_start - w1 * gh_end,
            h_dot: rows.ds.dot(&xi.xi_h) + (gh_start - gh_end) * inv_dt,
            h_ddot: rows.dds.dot(&xi.xi_h),
        }
    }

    /// Evaluates the functionals at domain point `z ∈ [-1, 1]`.
    pub fn eval(&self, xi: &Coefficients, z: f64) -> Result<VariableState> {
        if !xi.is_consistent() || xi.len() != self.spec.len() {
            return Err(Error::InvalidArgument(
                "coefficient length does not match the basis",
            ));
        }
        let rows = basis_rows(&self.spec, z)?;
        Ok(self.eval_with_rows(xi, &rows, z))
    }

    /// Rows of `∂(p, ṗ, p̈)/∂ξ_p` at one point (identical for `θ` and `h`:
    /// the switching structure shares one shape across the variables).
    ///
    /// Value row: `a = s - w0 s(-1) - w1 s(+1)`; it vanishes identically at
    /// the endpoints — coefficients cannot move the boundary values.
    /// Derivative row: `ȧ = ṡ + [s(-1) - s(+1)]/ΔT`; second derivative row
    /// is `s̈` itself.
    pub fn partial_rows(&self, rows: &BasisRows, z: f64) -> PartialRows {
        let t = self.spec.time_of(z);
        let (w0, w1) = self.weights(t);
        let inv_dt = 1.0 / self.spec.tof;
        let n = self.spec.len();
        let mut a = DVector::zeros(n);
        let mut a_dot = DVector::zeros(n);
        for j in 0..n {
            a[j] = rows.s[j] - w0 * self.s_start[j] - w1 * self.s_end[j];
            a_dot[j] = rows.ds[j] + (self.s_start[j] - self.s_end[j]) * inv_dt;
        }
        PartialRows {
            a,
            a_dot,
            a_ddot: rows.dds.clone(),
        }
    }
}

/// Coefficient-sensitivity rows of one functional at one collocation point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRows {
    /// `∂p/∂ξ_p` (= `∂θ/∂ξ_θ` = `∂h/∂ξ_h`).
    pub a: DVector<f64>,
    /// `∂ṗ/∂ξ_p`.
    pub a_dot: DVector<f64>,
    /// `∂p̈/∂ξ_p`.
    pub a_ddot: DVector<f64>,
}

/// Reconstructs the frame-local Cartesian state from the transfer
/// variables:
///
/// ```text
/// r = (p cos θ, p sin θ, h),   |r| = sqrt(p² + h²)
/// ```
///
/// with velocity and acceleration by direct differentiation.
pub(crate) fn reconstruct_local(vs: &VariableState) -> LocalState {
    let (sin_t, cos_t) = vs.theta.sin_cos();
    let radial_acc = vs.p_ddot - vs.p * vs.theta_dot * vs.theta_dot;
    let transverse_acc = 2.0 * vs.p_dot * vs.theta_dot + vs.p * vs.theta_ddot;
    LocalState {
        r: Vector3::new(vs.p * cos_t, vs.p * sin_t, vs.h),
        v: Vector3::new(
            vs.p_dot * cos_t - vs.p * vs.theta_dot * sin_t,
            vs.p_dot * sin_t + vs.p * vs.theta_dot * cos_t,
            vs.h_dot,
        ),
        a: Vector3::new(
            radial_acc * cos_t - transverse_acc * sin_t,
            radial_acc * sin_t + transverse_acc * cos_t,
            vs.h_ddot,
        ),
        radius: (vs.p * vs.p + vs.h * vs.h).sqrt(),
    }
}

/// Reconstructs the inertial Cartesian state from the transfer variables.
pub fn reconstruct_state(vs: &VariableState, frame: &TransferFrame) -> CartesianState {
    let local = reconstruct_local(vs);
    CartesianState {
        r: frame.to_inertial(&local.r),
        v: frame.to_inertial(&local.v),
        a: frame.to_inertial(&local.a),
        radius: local.radius,
    }
}
