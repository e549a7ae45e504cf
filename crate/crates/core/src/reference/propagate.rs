//! Adaptive Runge-Kutta propagation of the perturbed two-body problem.
//!
//! Dormand-Prince 5(4) with the first-same-as-last optimization, a
//! PI step controller, and the matching fourth-order dense-output
//! interpolant, so trajectories can be compared at arbitrary times without
//! re-integrating. Tolerances default to `1e-12`; the propagator is the
//! precision reference the collocation solutions are judged against, so it
//! is kept deliberately tight.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3, Vector6};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::perturbations::PerturbationModel;

/// Integrator tolerances and step budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on accepted + rejected steps, against pathological inputs.
    pub max_steps: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

type State = Vector6<f64>;

/// Central-body gravity for near-zero radii is meaningless; abort instead.
const SINGULAR_RADIUS_SQ: f64 = 1e-30;

/// Central finite-difference step for the velocity sensitivity, sized for
/// canonically scaled problems.
const STM_STEP: f64 = 1e-7;

fn stack(r: &Vector3<f64>, v: &Vector3<f64>) -> State {
    State::new(r.x, r.y, r.z, v.x, v.y, v.z)
}

fn position(y: &State) -> Vector3<f64> {
    Vector3::new(y[0], y[1], y[2])
}

fn velocity(y: &State) -> Vector3<f64> {
    Vector3::new(y[3], y[4], y[5])
}

fn derivative(
    mu: f64,
    models: &[Arc<dyn PerturbationModel>],
    t: f64,
    y: &State,
) -> Result<State> {
    let r = position(y);
    let v = velocity(y);
    let r2 = r.norm_squared();
    if r2 <= SINGULAR_RADIUS_SQ {
        return Err(Error::DegenerateRadius);
    }
    let mut a = -mu / (r2 * r2.sqrt()) * r;
    for m in models {
        a += m.accel(&r, &v, t)?;
    }
    Ok(stack(&v, &a))
}

/// Specific orbital energy `v²/2 - μ/|r|`; conserved by unperturbed motion.
pub fn specific_energy(mu: f64, r: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    0.5 * v.norm_squared() - mu / r.norm()
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Embedded error coefficients (5th minus 4th order weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output quartic coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step's dense-output polynomial.
#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    rcont: [State; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> State {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        self.rcont[0]
            + theta
                * (self.rcont[1]
                    + theta1 * (self.rcont[2] + theta * (self.rcont[3] + theta1 * self.rcont[4])))
    }
}

/// Continuously sampleable propagation result over `[0, tof]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    steps: Vec<DenseStep>,
    tof: f64,
    y_end: State,
}

impl Trajectory {
    pub fn tof(&self) -> f64 {
        self.tof
    }

    pub fn final_state(&self) -> (Vector3<f64>, Vector3<f64>) {
        (position(&self.y_end), velocity(&self.y_end))
    }

    /// Interpolated state at `t ∈ [0, tof]`.
    pub fn sample(&self, t: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let slack = 1e-9 * self.tof;
        if !(t >= -slack && t <= self.tof + slack) {
            return Err(Error::OutOfDomain { t, tof: self.tof });
        }
        if t >= self.tof {
            return Ok(self.final_state());
        }
        // Last step starting at or before t.
        let idx = self
            .steps
            .partition_point(|s| s.t0 <= t)
            .saturating_sub(1);
        let y = self.steps[idx].eval(t);
        Ok((position(&y), velocity(&y)))
    }
}

struct Integrator<'a> {
    mu: f64,
    models: &'a [Arc<dyn PerturbationModel>],
    config: &'a PropagatorConfig,
}

impl Integrator<'_> {
    fn error_norm(&self, y0: &State, y1: &State, err: &State) -> f64 {
        let mut sum = 0.0;
        for i in 0..6 {
            let sc = self.config.abs_tol + self.config.rel_tol * y0[i].abs().max(y1[i].abs());
            let e = err[i] / sc;
            sum += e * e;
        }
        (sum / 6.0).sqrt()
    }

    /// Hairer-style starting step guess from the first derivative and a
    /// trial Euler step.
    fn initial_step(&self, t0: f64, y0: &State, f0: &State, tof: f64) -> Result<f64> {
        let scale = |y: &State, w: &State| -> f64 {
            let mut sum = 0.0;
            for i in 0..6 {
                let sc = self.config.abs_tol + self.config.rel_tol * y[i].abs();
                let e = w[i] / sc;
                sum += e * e;
            }
            (sum / 6.0).sqrt()
        };
        let d0 = scale(y0, y0);
        let d1 = scale(y0, f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(tof);
        let y1 = y0 + h0 * f0;
        let f1 = derivative(self.mu, self.models, t0 + h0, &y1)?;
        let d2 = scale(y0, &(f1 - f0)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(tof))
    }

    fn run(
        &self,
        r0: &Vector3<f64>,
        v0: &Vector3<f64>,
        tof: f64,
        collect: bool,
    ) -> Result<(State, Vec<DenseStep>)> {
        if !(tof > 0.0) || !tof.is_finite() {
            return Err(Error::InvalidArgument("time of flight must be positive"));
        }
        if !(self.config.rel_tol > 0.0) || !(self.config.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive"));
        }
        let mut t = 0.0_f64;
        let mut y = stack(r0, v0);
        let mut k1 = derivative(self.mu, self.models, t, &y)?;
        let mut h = self.initial_step(t, &y, &k1, tof)?;
        let mut steps = Vec::new();
        let mut facold = 1e-4_f64;
        let mut rejected = false;
        let mut n_steps = 0usize;

        const SAFE: f64 = 0.9;
        const BETA: f64 = 0.04;
        const EXPO1: f64 = 0.2 - BETA * 0.75;
        const FAC_SHRINK_MAX: f64 = 5.0; // step may shrink at most 5x
        const FAC_GROW_MAX: f64 = 0.1; // and grow at most 10x

        while t < tof {
            n_steps += 1;
            if n_steps > self.config.max_steps {
                return Err(Error::NoConvergence {
                    max_iter: self.config.max_steps,
                });
            }
            if h < 1e-14 * tof {
                return Err(Error::StepSizeUnderflow { t });
            }
            let mut last = false;
            if t + 1.01 * h >= tof {
                h = tof - t;
                last = true;
            }

            let f = |tt: f64, yy: &State| derivative(self.mu, self.models, tt, yy);
            let k2 = f(t + C2 * h, &(y + h * (A21 * k1)))?;
            let k3 = f(t + C3 * h, &(y + h * (A31 * k1 + A32 * k2)))?;
            let k4 = f(t + C4 * h, &(y + h * (A41 * k1 + A42 * k2 + A43 * k3)))?;
            let k5 = f(
                t + C5 * h,
                &(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)),
            )?;
            let k6 = f(
                t + h,
                &(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)),
            )?;
            let dy = h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let y_new = y + dy;
            let k7 = f(t + h, &y_new)?;
            let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let err = self.error_norm(&y, &y_new, &err_vec);

            if err <= 1.0 {
                // Accepted.
                if collect {
                    let rcont3 = h * k1 - dy;
                    let rcont4 = dy - h * k7 - rcont3;
                    let rcont5 =
                        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
                    steps.push(DenseStep {
                        t0: t,
                        h,
                        rcont: [y, dy, rcont3, rcont4, rcont5],
                    });
                }
                t = if last { tof } else { t + h };
                y = y_new;
                k1 = k7;
                let fac11 = err.powf(EXPO1);
                // Lund stabilization: damp against the previous accepted error.
                let mut fac = fac11 / facold.powf(BETA) / SAFE;
                facold = err.max(1e-4);
                fac = fac.clamp(FAC_GROW_MAX, FAC_SHRINK_MAX);
                let mut h_new = h / fac;
                if rejected {
                    h_new = h_new.min(h);
                }
                rejected = false;
                h = h_new;
            } else {
                rejected = true;
                let fac11 = err.powf(EXPO1);
                h /= (fac11 / SAFE).min(FAC_SHRINK_MAX);
            }
        }
        Ok((y, steps))
    }
}

/// Integrates from `(r0, v0)` for `tof` and returns the final state.
pub fn propagate(
    mu: f64,
    r0: &Vector3<f64>,
    v0: &Vector3<f64>,
    tof: f64,
    models: &[Arc<dyn PerturbationModel>],
    config: &PropagatorConfig,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let (y, _) = Integrator { mu, models, config }.run(r0, v0, tof, false)?;
    Ok((position(&y), velocity(&y)))
}

/// Integrates and keeps every accepted step's interpolant, so the result
/// can be sampled continuously.
pub fn propagate_dense(
    mu: f64,
    r0: &Vector3<f64>,
    v0: &Vector3<f64>,
    tof: f64,
    models: &[Arc<dyn PerturbationModel>],
    config: &PropagatorConfig,
) -> Result<Trajectory> {
    let (y, steps) = Integrator { mu, models, config }.run(r0, v0, tof, true)?;
    Ok(Trajectory {
        steps,
        tof,
        y_end: y,
    })
}

/// Sensitivity of the arrival position to the departure velocity,
/// `∂r(tof)/∂v0`, by central differences over six propagations.
///
/// The step is fixed at `1e-7`, sized for canonically scaled problems; pass
/// scaled states.
pub fn finite_diff_stm(
    mu: f64,
    r0: &Vector3<f64>,
    v0: &Vector3<f64>,
    tof: f64,
    models: &[Arc<dyn PerturbationModel>],
    config: &PropagatorConfig,
) -> Result<Matrix3<f64>> {
    let mut j = Matrix3::zeros();
    for c in 0..3 {
        let mut vp = *v0;
        let mut vm = *v0;
        vp[c] += STM_STEP;
        vm[c] -= STM_STEP;
        let (rp, _) = propagate(mu, r0, &vp, tof, models, config)?;
        let (rm, _) = propagate(mu, r0, &vm, tof, models, config)?;
        j.set_column(c, &((rp - rm) / (2.0 * STM_STEP)));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn cfg() -> PropagatorConfig {
        PropagatorConfig::default()
    }

    #[test]
    fn circular_orbit_closes_after_one_period() {
        // Unit circular orbit: r = (1,0,0), v = (0,1,0), period 2π.
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let v0 = Vector3::new(0.0, 1.0, 0.0);
        let (r, v) = propagate(1.0, &r0, &v0, 2.0 * PI, &[], &cfg()).unwrap();
        assert_relative_eq!(r, r0, epsilon = 1e-10);
        assert_relative_eq!(v, v0, epsilon = 1e-10);
    }

    #[test]
    fn energy_is_conserved_on_an_eccentric_orbit() {
        // e = 0.5 ellipse in canonical units: apoapsis at 3 when periapsis
        // at 1, v_p = sqrt(μ (1+e) / r_p).
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let v0 = Vector3::new(0.0, (1.5f64).sqrt(), 0.0);
        let a = 2.0_f64; // rp / (1 - e)
        let period = 2.0 * PI * a.powf(1.5);
        let e0 = specific_energy(1.0, &r0, &v0);
        let traj = propagate_dense(1.0, &r0, &v0, period, &[], &cfg()).unwrap();
        for k in 0..=100 {
            let t = period * k as f64 / 100.0;
            let (r, v) = traj.sample(t).unwrap();
            let e = specific_energy(1.0, &r, &v);
            assert_relative_eq!(e, e0, max_relative = 1e-10);
        }
        let (r_end, _) = traj.final_state();
        assert_relative_eq!(r_end, r0, epsilon = 1e-9);
    }

    #[test]
    fn dense_output_matches_direct_integration() {
        let r0 = Vector3::new(1.0, 0.2, -0.1);
        let v0 = Vector3::new(-0.1, 1.05, 0.03);
        let tof = 4.0;
        let traj = propagate_dense(1.0, &r0, &v0, tof, &[], &cfg()).unwrap();
        for &t in &[0.0, 0.31, 1.7, 2.9, tof] {
            let (r_dense, v_dense) = traj.sample(t).unwrap();
            if t == 0.0 {
                assert_relative_eq!(r_dense, r0, epsilon = 1e-14);
                continue;
            }
            let (r_direct, v_direct) = propagate(1.0, &r0, &v0, t, &[], &cfg()).unwrap();
            assert_relative_eq!(r_dense, r_direct, epsilon = 1e-9);
            assert_relative_eq!(v_dense, v_direct, epsilon = 1e-9);
        }
        assert!(traj.sample(-0.5).is_err());
        assert!(traj.sample(tof * 1.1).is_err());
    }

    #[test]
    fn tight_and_loose_tolerances_bracket_each_other() {
        let r0 = Vector3::new(1.0, 0.0, 0.1);
        let v0 = Vector3::new(0.05, 1.1, -0.02);
        let tight = propagate(1.0, &r0, &v0, 7.0, &[], &cfg()).unwrap();
        let loose_cfg = PropagatorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            ..cfg()
        };
        let loose = propagate(1.0, &r0, &v0, 7.0, &[], &loose_cfg).unwrap();
        // Loose answer agrees to roughly its own tolerance, not better than
        // the tight one.
        assert_relative_eq!(loose.0, tight.0, epsilon = 1e-6);
    }

    #[test]
    fn stm_of_short_arc_is_nearly_tof_times_identity() {
        // For tiny tof, r(tof) ≈ r0 + v0 tof, so ∂r/∂v0 ≈ tof · I.
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let v0 = Vector3::new(0.0, 1.0, 0.0);
        let tof = 1e-4;
        let j = finite_diff_stm(1.0, &r0, &v0, tof, &[], &cfg()).unwrap();
        assert_relative_eq!(j, Matrix3::identity() * tof, epsilon = 1e-9);
    }

    #[test]
    fn singular_radius_is_reported() {
        // Radial plunge straight through the center.
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let v0 = Vector3::new(-1.5, 0.0, 0.0);
        let err = propagate(1.0, &r0, &v0, 2.0, &[], &cfg()).unwrap_err();
        assert!(matches!(
            err,
            Error::StepSizeUnderflow { .. } | Error::DegenerateRadius | Error::NoConvergence { .. }
        ));
    }

    #[test]
    fn rejects_nonpositive_tof() {
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let v0 = Vector3::new(0.0, 1.0, 0.0);
        assert!(propagate(1.0, &r0, &v0, 0.0, &[], &cfg()).is_err());
        assert!(propagate(1.0, &r0, &v0, -1.0, &[], &cfg()).is_err());
    }
}
