//! Collocation residual/Jacobian assembly and the Gauss-Newton driver.
//!
//! The dynamics residual at a collocation point is
//!
//! ```text
//! L = r̈ + μ r / |r|³ - a_p(r, ṙ, t)
//! ```
//!
//! evaluated in frame-local components, where `r`, `ṙ`, `r̈` come from the
//! constrained functionals. Stacking `L` over all nodes gives `3n`
//! equations in the `3(m+1)` free coefficients; each Gauss-Newton step
//! solves the linearized system in the least-squares sense through an
//! orthogonal (QR) factorization — the normal equations are never formed.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::basis::{basis_rows, cgl_nodes, BasisKind, BasisRows, BasisSpec};
use crate::error::{Error, Result};
use crate::perturbations::PerturbationModel;
use crate::tfc::functionals::{
    reconstruct_local, Coefficients, Functionals, PartialRows,
};
use crate::tfc::geometry::{mean_frequency, Scaling, TransferFrame};
use crate::tfc::BoundaryValueProblem;

/// Radii below this fraction of the larger boundary radius abort the
/// evaluation: the iterate has collapsed into the attracting center.
const RADIUS_FLOOR_FRACTION: f64 = 1e-12;

/// Solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of collocation nodes; must be at least `degree + 2` so the
    /// least-squares system stays overdetermined.
    pub n_points: usize,
    /// Convergence tolerance on the residual max-norm (in the solver's
    /// working units) and on the step 2-norm.
    pub tol: f64,
    /// Gauss-Newton iteration budget. Exhausting it is a recorded outcome,
    /// not an error.
    pub max_iter: usize,
    pub kind: BasisKind,
    /// Highest polynomial degree `m`.
    pub degree: usize,
    /// Solve in canonical units (departure radius and `μ` both one). Keep
    /// on except for problems that are already well scaled.
    pub nondimensionalize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_points: 200,
            tol: 1e-9,
            max_iter: 200,
            kind: BasisKind::Legendre,
            degree: 20,
            nondimensionalize: true,
        }
    }
}

impl SolverConfig {
    pub fn with_kind(mut self, kind: BasisKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(Error::InvalidArgument("basis degree must be at least 2"));
        }
        if self.n_points < self.degree + 2 {
            return Err(Error::InvalidArgument(
                "need at least degree + 2 collocation points",
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("need at least one iteration"));
        }
        Ok(())
    }
}

/// What ended the Gauss-Newton loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Residual max-norm dropped below tolerance.
    ResidualTolerance,
    /// Step 2-norm dropped below tolerance (stagnation; the final residual
    /// decides whether this counts as converged).
    StepTolerance,
    /// Iteration budget exhausted.
    IterationLimit,
    /// Residual became non-finite; the iterate left the basin entirely.
    Diverged,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ResidualTolerance => "residual_tolerance",
            StopReason::StepTolerance => "step_tolerance",
            StopReason::IterationLimit => "iteration_limit",
            StopReason::Diverged => "diverged",
        }
    }
}

impl core::fmt::Display for StopReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Iteration record of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Number of Gauss-Newton updates applied.
    pub iterations: usize,
    /// Final residual max-norm at or below tolerance.
    pub converged: bool,
    pub stop: StopReason,
    /// Residual max-norm before each update, plus the final value.
    pub residual_history: Vec<f64>,
}

impl Diagnostics {
    pub fn residual_final(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("history holds at least the initial residual")
    }
}

/// Pre-assembled collocation context: basis rows, coefficient-sensitivity
/// rows, and node times are all iterate-independent, so they are computed
/// once and reused across Gauss-Newton iterations.
pub struct CollocationSystem {
    funcs: Functionals,
    frame: TransferFrame,
    rotation: Matrix3<f64>,
    mu: f64,
    models: Vec<Arc<dyn PerturbationModel>>,
    times: Vec<f64>,
    rows: Vec<BasisRows>,
    partials: Vec<PartialRows>,
    radius_floor: f64,
}

impl CollocationSystem {
    /// Builds the context. The basis `tof` must match the problem's, the
    /// node count must keep the system overdetermined, and problem and
    /// basis must be expressed in the same units.
    pub fn new(
        bvp: &BoundaryValueProblem,
        frame: &TransferFrame,
        spec: &BasisSpec,
        nodes: &[f64],
    ) -> Result<Self> {
        if (spec.tof - bvp.tof).abs() > 1e-9 * bvp.tof {
            return Err(Error::InvalidArgument(
                "basis and problem disagree on the time of flight",
            ));
        }
        if nodes.len() < spec.degree + 2 {
            return Err(Error::InvalidArgument(
                "need at least degree + 2 collocation points",
            ));
        }
        let p0 = bvp.r0.norm();
        let pf = bvp.rf.norm();
        let funcs = Functionals::for_problem(spec.clone(), p0, pf, frame, bvp.revolutions)?;
        let mut times = Vec::with_capacity(nodes.len());
        let mut rows = Vec::with_capacity(nodes.len());
        let mut partials = Vec::with_capacity(nodes.len());
        for &z in nodes {
            let r = basis_rows(spec, z)?;
            partials.push(funcs.partial_rows(&r, z));
            times.push(spec.time_of(z));
            rows.push(r);
        }
        Ok(Self {
            funcs,
            frame: frame.clone(),
            rotation: frame.rotation(),
            mu: bvp.mu,
            models: bvp.perturbations.clone(),
            times,
            rows,
            partials,
            radius_floor: RADIUS_FLOOR_FRACTION * p0.max(pf),
        })
    }

    pub fn functionals(&self) -> &Functionals {
        &self.funcs
    }

    pub fn frame(&self) -> &TransferFrame {
        &self.frame
    }

    pub fn n_nodes(&self) -> usize {
        self.times.len()
    }

    /// Stacked dynamics residual, `3 × n_nodes` entries.
    pub fn residual(&self, xi: &Coefficients) -> Result<DVector<f64>> {
        Ok(self.assemble(xi, false)?.0)
    }

    /// Residual Jacobian with respect to the stacked coefficients
    /// `[ξ_p, ξ_θ, ξ_h]`.
    pub fn jacobian(&self, xi: &Coefficients) -> Result<DMatrix<f64>> {
        Ok(self.assemble(xi, true)?.1.expect("jacobian requested"))
    }

    /// One pass over the nodes, producing the residual and (optionally) its
    /// Jacobian from the same intermediate state.
    fn assemble(
        &self,
        xi: &Coefficients,
        want_jacobian: bool,
    ) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let nb = self.funcs.spec.len();
        if !xi.is_consistent() || xi.len() != nb {
            return Err(Error::InvalidArgument(
                "coefficient length does not match the basis",
            ));
        }
        let n = self.times.len();
        let mut res = DVector::zeros(3 * n);
        let mut jac = if want_jacobian {
            Some(DMatrix::zeros(3 * n, 3 * nb))
        } else {
            None
        };
        let has_models = !self.models.is_empty();
        let rot = &self.rotation;

        for i in 0..n {
            let z = 2.0 * self.times[i] / self.funcs.spec.tof - 1.0;
            let vs = self.funcs.eval_with_rows(xi, &self.rows[i], z);
            let loc = reconstruct_local(&vs);
            if !(loc.radius > self.radius_floor) {
                return Err(Error::DegenerateRadius);
            }
            let r3 = loc.radius * loc.radius * loc.radius;
            let mu_r3 = self.mu / r3;

            // Perturbations act on inertial states; rotate out and back.
            let mut a_pert = Vector3::zeros();
            let mut jr_pert = Matrix3::zeros();
            let mut jv_pert = Matrix3::zeros();
            if has_models {
                let r_in = rot * loc.r;
                let v_in = rot * loc.v;
                let t = self.times[i];
                let mut a_in = Vector3::zeros();
                for m in &self.models {
                    a_in += m.accel(&r_in, &v_in, t)?;
                }
                a_pert = rot.transpose() * a_in;
                if want_jacobian {
                    let mut jr_in = Matrix3::zeros();
                    let mut jv_in = Matrix3::zeros();
                    for m in &self.models {
                        jr_in += m.jac_r(&r_in, &v_in, t)?;
                        jv_in += m.jac_v(&r_in, &v_in, t)?;
                    }
                    jr_pert = rot.transpose() * jr_in * rot;
                    jv_pert = rot.transpose() * jv_in * rot;
                }
            }

            let l = loc.a + mu_r3 * loc.r - a_pert;
            res[3 * i] = l.x;
            res[3 * i + 1] = l.y;
            res[3 * i + 2] = l.z;

            let Some(jac) = jac.as_mut() else { continue };

            let (sin_t, cos_t) = vs.theta.sin_cos();
            let pr = &self.partials[i];
            let mu_r4_scaled = 3.0 * self.mu / (r3 * loc.radius);
            // d|r|/dp and d|r|/dh, per unit coefficient row value.
            let dr_dp = vs.p / loc.radius;
            let dr_dh = vs.h / loc.radius;

            for j in 0..nb {
                let aj = pr.a[j];
                let aj1 = pr.a_dot[j];
                let aj2 = pr.a_ddot[j];

                // --- ξ_p block ------------------------------------------
                let dr = Vector3::new(cos_t * aj, sin_t * aj, 0.0);
                let dv = Vector3::new(
                    aj1 * cos_t - vs.theta_dot * sin_t * aj,
                    aj1 * sin_t + vs.theta_dot * cos_t * aj,
                    0.0,
                );
                let da_rad = aj2 - vs.theta_dot * vs.theta_dot * aj;
                let da_tra = 2.0 * vs.theta_dot * aj1 + vs.theta_ddot * aj;
                let da = Vector3::new(
                    da_rad * cos_t - da_tra * sin_t,
                    da_rad * sin_t + da_tra * cos_t,
                    0.0,
                );
                let mut col = da + mu_r3 * dr - (mu_r4_scaled * dr_dp * aj) * loc.r;
                if has_models {
                    col -= jr_pert * dr + jv_pert * dv;
                }
                jac[(3 * i, j)] = col.x;
                jac[(3 * i + 1, j)] = col.y;
                jac[(3 * i + 2, j)] = col.z;

                // --- ξ_θ block ------------------------------------------
                // Rotating the local frame content by dθ: position and
                // velocity variations fall out of the reconstructed state
                // itself; |r| does not depend on θ.
                let dr = Vector3::new(-loc.r.y * aj, loc.r.x * aj, 0.0);
                let dv = Vector3::new(
                    -loc.v.y * aj - vs.p * sin_t * aj1,
                    loc.v.x * aj + vs.p * cos_t * aj1,
                    0.0,
                );
                let d_rad = -2.0 * vs.p * vs.theta_dot * aj1;
                let d_tra = 2.0 * vs.p_dot * aj1 + vs.p * aj2;
                let da = Vector3::new(
                    d_rad * cos_t - d_tra * sin_t - loc.a.y * aj,
                    d_rad * sin_t + d_tra * cos_t + loc.a.x * aj,
                    0.0,
                );
                let mut col = da + mu_r3 * dr;
                if has_models {
                    col -= jr_pert * dr + jv_pert * dv;
                }
                jac[(3 * i, nb + j)] = col.x;
                jac[(3 * i + 1, nb + j)] = col.y;
                jac[(3 * i + 2, nb + j)] = col.z;

                // --- ξ_h block ------------------------------------------
                let dr = Vector3::new(0.0, 0.0, aj);
                let dv = Vector3::new(0.0, 0.0, aj1);
                let mut col = Vector3::new(0.0, 0.0, aj2) + mu_r3 * dr
                    - (mu_r4_scaled * dr_dh * aj) * loc.r;
                if has_models {
                    col -= jr_pert * dr + jv_pert * dv;
                }
                jac[(3 * i, 2 * nb + j)] = col.x;
                jac[(3 * i + 1, 2 * nb + j)] = col.y;
                jac[(3 * i + 2, 2 * nb + j)] = col.z;
            }
        }
        Ok((res, jac))
    }
}

/// Minimum-norm least-squares solve of `A x = b` through a rank-revealing
/// decomposition.
///
/// The collocation matrix is rank-deficient by design at working precision:
/// over a short-phase arc the `cos ωt`/`sin ωt` columns are absorbed by the
/// polynomial columns to below machine epsilon. Directions with singular
/// values under a LAPACK-style cutoff are therefore dropped rather than
/// inverted, which also keeps Gauss-Newton steps bounded.
fn least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (nr, nc) = a.shape();
    debug_assert!(nr >= nc);
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite entries in the least-squares matrix",
        ));
    }
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.amax();
    if !(sigma_max > 0.0) {
        return Err(Error::RankDeficient);
    }
    let cutoff = sigma_max * f64::EPSILON * nr.max(nc) as f64;
    svd.solve(b, cutoff).map_err(|_| Error::RankDeficient)
}

/// A converged (or at least terminated) transfer solution.
///
/// Velocities are reported in the problem's original units; the coefficient
/// vector and internal evaluator live in the solver's working units.
pub struct Solution {
    pub coefficients: Coefficients,
    pub frame: TransferFrame,
    /// Departure velocity in problem units.
    pub v0: Vector3<f64>,
    /// Arrival velocity in problem units.
    pub vf: Vector3<f64>,
    pub diagnostics: Diagnostics,
    funcs: Functionals,
    scaling: Scaling,
}

impl Solution {
    /// Basis the solution was expanded in (working units).
    pub fn basis(&self) -> &BasisSpec {
        &self.funcs.spec
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    /// Time of flight in problem units.
    pub fn tof(&self) -> f64 {
        self.funcs.spec.tof * self.scaling.time
    }

    /// Position and velocity at time `t ∈ [0, tof]` (problem units).
    pub fn sample(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let tof = self.tof();
        let slack = 1e-9 * tof;
        if !(t >= -slack && t <= tof + slack) {
            return Err(Error::OutOfDomain { t, tof });
        }
        let z = self.funcs.spec.z_of(t / self.scaling.time).clamp(-1.0, 1.0);
        let vs = self.funcs.eval(&self.coefficients, z)?;
        let loc = reconstruct_local(&vs);
        Ok((
            self.frame.to_inertial(&loc.r) * self.scaling.length,
            self.frame.to_inertial(&loc.v) * self.scaling.velocity(),
        ))
    }

    /// The transfer variables at `t`, in working (scaled) units; mostly for
    /// diagnostics.
    pub fn variables_at(&self, t: f64) -> Result<crate::tfc::VariableState> {
        let tof = self.tof();
        let slack = 1e-9 * tof;
        if !(t >= -slack && t <= tof + slack) {
            return Err(Error::OutOfDomain { t, tof });
        }
        let z = self.funcs.spec.z_of(t / self.scaling.time).clamp(-1.0, 1.0);
        self.funcs.eval(&self.coefficients, z)
    }
}

/// Samples a solution at many times; see [`Solution::sample`].
pub fn sample_solution(
    solution: &Solution,
    times: &[f64],
) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>> {
    times.iter().map(|&t| solution.sample(t)).collect()
}

/// Solves the boundary-value problem by Gauss-Newton collocation.
///
/// Starts from zero coefficients (the functional then already satisfies the
/// boundary conditions and sweeps linearly) unless `warm_start` supplies an
/// initial coefficient set, typically fitted from a related converged
/// solution. Returns a [`Solution`] whether or not the iteration converged;
/// inspect [`Diagnostics::converged`]. Errors are reserved for structurally
/// broken inputs (bad geometry, rank loss, degenerate radii).
pub fn solve(
    bvp: &BoundaryValueProblem,
    config: &SolverConfig,
    warm_start: Option<&Coefficients>,
) -> Result<Solution> {
    config.validate()?;
    let frame = bvp.frame()?;
    let (work, scaling) = if config.nondimensionalize {
        bvp.nondimensionalized()
    } else {
        (bvp.clone(), Scaling::identity())
    };
    let omega = mean_frequency(frame.sweep_angle, work.revolutions, work.tof);
    let spec = BasisSpec::new(config.kind, config.degree, omega, work.tof)?;
    let nodes = cgl_nodes(config.n_points)?;
    let system = CollocationSystem::new(&work, &frame, &spec, &nodes)?;

    let nb = spec.len();
    let mut xi = match warm_start {
        Some(w) => {
            if !w.is_consistent() || w.len() != nb {
                return Err(Error::InvalidArgument(
                    "warm-start coefficient length does not match the basis",
                ));
            }
            w.clone()
        }
        None => Coefficients::zeros(nb),
    };

    let mut history = Vec::with_capacity(config.max_iter + 2);
    let mut iterations = 0usize;
    let stop;
    loop {
        let (res, jac) = system.assemble(&xi, true)?;
        let rnorm = res.amax();
        history.push(rnorm);
        if rnorm <= config.tol {
            stop = StopReason::ResidualTolerance;
            break;
        }
        if !rnorm.is_finite() {
            stop = StopReason::Diverged;
            break;
        }
        if iterations >= config.max_iter {
            stop = StopReason::IterationLimit;
            break;
        }
        let step = least_squares(jac.expect("jacobian requested"), &res)?;
        xi.apply_step(&step);
        iterations += 1;
        if step.norm() <= config.tol {
            // Stagnated; record where the residual ended up and stop.
            history.push(system.residual(&xi)?.amax());
            stop = StopReason::StepTolerance;
            break;
        }
    }

    let final_residual = *history.last().expect("at least one residual");
    let converged = final_residual <= config.tol;

    let funcs = system.functionals().clone();
    let v_start = reconstruct_local(&funcs.eval(&xi, -1.0)?).v;
    let v_end = reconstruct_local(&funcs.eval(&xi, 1.0)?).v;
    Ok(Solution {
        v0: frame.to_inertial(&v_start) * scaling.velocity(),
        vf: frame.to_inertial(&v_end) * scaling.velocity(),
        coefficients: xi,
        frame,
        diagnostics: Diagnostics {
            iterations,
            converged,
            stop,
            residual_history: history,
        },
        funcs,
        scaling,
    })
}

/// Fits coefficients to a sampled trajectory so a perturbed solve can start
/// from a related converged arc instead of from zero.
///
/// `samples` are `(t, r)` pairs in problem units, sorted by time within
/// `[0, tof]`, dense enough that the in-plane angle advances by less than
/// half a revolution between consecutive samples (the angle is unwrapped
/// cumulatively). The fit is linear: the value rows of the functional
/// partials against the frame-local targets, solved per variable through
/// one shared QR factorization.
pub fn warm_start_fit(
    bvp: &BoundaryValueProblem,
    config: &SolverConfig,
    samples: &[(f64, Vector3<f64>)],
) -> Result<Coefficients> {
    config.validate()?;
    let frame = bvp.frame()?;
    let scaling = if config.nondimensionalize {
        bvp.scaling()
    } else {
        Scaling::identity()
    };
    let tof = bvp.tof / scaling.time;
    let omega = mean_frequency(frame.sweep_angle, bvp.revolutions, tof);
    let spec = BasisSpec::new(config.kind, config.degree, omega, tof)?;
    let funcs = Functionals::for_problem(
        spec.clone(),
        bvp.r0.norm() / scaling.length,
        bvp.rf.norm() / scaling.length,
        &frame,
        bvp.revolutions,
    )?;

    let nb = spec.len();
    // The value rows vanish at the endpoints, so demand enough interior
    // information to keep the fit overdetermined.
    if samples.len() < nb + 2 {
        return Err(Error::InsufficientSamples {
            needed: nb + 2,
            got: samples.len(),
        });
    }
    if !samples.windows(2).all(|w| w[1].0 >= w[0].0) {
        return Err(Error::InvalidArgument("samples must be sorted by time"));
    }

    let ns = samples.len();
    let mut a = DMatrix::zeros(ns, nb);
    let mut rhs_p = DVector::zeros(ns);
    let mut rhs_t = DVector::zeros(ns);
    let mut rhs_h = DVector::zeros(ns);
    let mut prev_theta = 0.0_f64;
    let two_pi = 2.0 * core::f64::consts::PI;
    let slack = 1e-9 * tof;
    for (i, (t_raw, r_raw)) in samples.iter().enumerate() {
        let t = t_raw / scaling.time;
        if !(t >= -slack && t <= tof + slack) {
            return Err(Error::OutOfDomain {
                t: *t_raw,
                tof: bvp.tof,
            });
        }
        let z = spec.z_of(t).clamp(-1.0, 1.0);
        let rows = basis_rows(&spec, z)?;
        let pr = funcs.partial_rows(&rows, z);
        for j in 0..nb {
            a[(i, j)] = pr.a[j];
        }
        let loc = frame.to_local(&(r_raw / scaling.length));
        let p = (loc.x * loc.x + loc.y * loc.y).sqrt();
        let theta_raw = loc.y.atan2(loc.x);
        // Unwrap onto the branch nearest the previous sample.
        let theta = theta_raw + two_pi * ((prev_theta - theta_raw) / two_pi).round();
        prev_theta = theta;
        let w1 = t / tof;
        let w0 = 1.0 - w1;
        rhs_p[i] = p - (w0 * funcs.p0 + w1 * funcs.pf);
        rhs_t[i] = theta - w1 * funcs.theta_total;
        rhs_h[i] = loc.z;
    }

    // One decomposition, three right-hand sides; minimum-norm like the
    // solver itself, since the trig columns may duplicate the polynomial
    // span at working precision.
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.amax();
    if !(sigma_max > 0.0) {
        return Err(Error::RankDeficient);
    }
    let cutoff = sigma_max * f64::EPSILON * ns.max(nb) as f64;
    let solve_one = |b: &DVector<f64>| -> Result<DVector<f64>> {
        svd.solve(b, cutoff).map_err(|_| Error::RankDeficient)
    };
    Ok(Coefficients {
        xi_p: solve_one(&rhs_p)?,
        xi_theta: solve_one(&rhs_t)?,
        xi_h: solve_one(&rhs_h)?,
    })
}
