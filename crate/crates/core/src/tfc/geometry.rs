//! Transfer-frame construction and problem scaling.
//!
//! The solver works in an orthonormal triad anchored at the departure
//! position: `r̂0` points along the initial radius, `ĥ0` along the transfer
//! angular momentum (the normal of the plane spanned by the two boundary
//! vectors), and `t̂0 = ĥ0 × r̂0` completes the right-handed set. In this
//! frame the trajectory is `r(t) = p(t)(r̂0 cos θ + t̂0 sin θ) + h(t) ĥ0`,
//! so the boundary conditions become scalar values of `p`, `θ`, and `h`.

use nalgebra::{Matrix3, Vector3};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative tolerance below which the boundary vectors are treated as
/// collinear: the plane normal `r0 × rf` must exceed this fraction of
/// `|r0||rf|`.
pub const GEOMETRY_TOLERANCE: f64 = 1e-10;

/// Orthonormal triad of the transfer plane plus the in-plane sweep angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFrame {
    /// Unit vector along the departure position.
    pub r_hat0: Vector3<f64>,
    /// In-plane transverse unit vector, `ĥ0 × r̂0`.
    pub t_hat0: Vector3<f64>,
    /// Transfer-plane normal (direction of motion's angular momentum).
    pub h_hat0: Vector3<f64>,
    /// Angle swept from `r0` to `rf` in the direction of motion, in
    /// `(0, 2π)`; greater than `π` exactly when the long way was requested.
    pub sweep_angle: f64,
}

impl TransferFrame {
    /// Rotation whose columns are `(r̂0, t̂0, ĥ0)`: maps frame-local
    /// components to inertial vectors.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.r_hat0, self.t_hat0, self.h_hat0])
    }

    /// Frame-local components → inertial vector.
    pub fn to_inertial(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.r_hat0 * local.x + self.t_hat0 * local.y + self.h_hat0 * local.z
    }

    /// Inertial vector → frame-local components.
    pub fn to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(v.dot(&self.r_hat0), v.dot(&self.t_hat0), v.dot(&self.h_hat0))
    }
}

/// Builds the transfer frame for a boundary-vector pair.
///
/// The short arc (sweep `< π`) is taken unless `long_way` is set, in which
/// case the plane normal flips and the sweep becomes `2π - θ`. Fails with
/// [`Error::SingularGeometry`] when the vectors are (near-)collinear, since
/// the transfer plane is then undefined.
pub fn build_frame(r0: &Vector3<f64>, rf: &Vector3<f64>, long_way: bool) -> Result<TransferFrame> {
    let n0 = r0.norm();
    let nf = rf.norm();
    if !(n0 > 0.0) || !(nf > 0.0) || !n0.is_finite() || !nf.is_finite() {
        return Err(Error::InvalidArgument(
            "boundary positions must be nonzero finite vectors",
        ));
    }
    let cross = r0.cross(rf);
    let cn = cross.norm();
    if cn <= GEOMETRY_TOLERANCE * n0 * nf {
        return Err(Error::SingularGeometry);
    }
    let r_hat0 = r0 / n0;
    let mut h_hat0 = cross / cn;
    let cos_sweep = (r_hat0.dot(rf) / nf).clamp(-1.0, 1.0);
    let mut sweep_angle = cos_sweep.acos();
    if long_way {
        h_hat0 = -h_hat0;
        sweep_angle = 2.0 * core::f64::consts::PI - sweep_angle;
    }
    let t_hat0 = h_hat0.cross(&r_hat0);
    Ok(TransferFrame {
        r_hat0,
        t_hat0,
        h_hat0,
        sweep_angle,
    })
}

/// Angular frequency of the basis trigonometric pair: the total swept angle
/// (including full revolutions) divided by the time of flight.
pub fn mean_frequency(sweep_angle: f64, revolutions: u32, tof: f64) -> f64 {
    (2.0 * core::f64::consts::PI * revolutions as f64 + sweep_angle) / tof
}

/// Length/time scale pair used to nondimensionalize a problem so that the
/// departure radius and the gravitational parameter both become one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub length: f64,
    pub time: f64,
}

impl Scaling {
    pub fn identity() -> Self {
        Self {
            length: 1.0,
            time: 1.0,
        }
    }

    /// Canonical units for a problem: `length = |r0|`,
    /// `time = sqrt(|r0|³/μ)`, which makes the scaled `μ` exactly the ratio
    /// it was derived from (1 up to rounding).
    pub fn canonical(r0_norm: f64, mu: f64) -> Self {
        Self {
            length: r0_norm,
            time: (r0_norm * r0_norm * r0_norm / mu).sqrt(),
        }
    }

    pub fn velocity(&self) -> f64 {
        self.length / self.time
    }

    pub fn acceleration(&self) -> f64 {
        self.length / (self.time * self.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use core::f64::consts::PI;

    #[test]
    fn frame_is_orthonormal_and_hits_rf() {
        let r0 = Vector3::new(7000.0, 1000.0, -400.0);
        let rf = Vector3::new(-2000.0, 42000.0, 5000.0);
        for long_way in [false, true] {
            let f = build_frame(&r0, &rf, long_way).unwrap();
            assert_abs_diff_eq!(f.r_hat0.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(f.t_hat0.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(f.h_hat0.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(f.r_hat0.dot(&f.t_hat0), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(f.r_hat0.dot(&f.h_hat0), 0.0, epsilon = 1e-14);
            // Rotating r̂0 by the sweep angle inside the plane lands on r̂f.
            let (s, c) = f.sweep_angle.sin_cos();
            let rf_hat = f.r_hat0 * c + f.t_hat0 * s;
            assert_relative_eq!(rf_hat, rf / rf.norm(), epsilon = 1e-12);
            if long_way {
                assert!(f.sweep_angle > PI && f.sweep_angle < 2.0 * PI);
            } else {
                assert!(f.sweep_angle > 0.0 && f.sweep_angle < PI);
            }
        }
    }

    #[test]
    fn long_way_flips_the_normal() {
        let r0 = Vector3::new(1.0, 0.0, 0.0);
        let rf = Vector3::new(0.0, 2.0, 0.0);
        let short = build_frame(&r0, &rf, false).unwrap();
        let long = build_frame(&r0, &rf, true).unwrap();
        assert_relative_eq!(short.h_hat0, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        assert_relative_eq!(long.h_hat0, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(short.sweep_angle, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(long.sweep_angle, 3.0 * PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn collinear_boundaries_are_rejected() {
        let r0 = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(
            build_frame(&r0, &(r0 * 2.5), false).unwrap_err(),
            Error::SingularGeometry
        );
        assert_eq!(
            build_frame(&r0, &(-r0), false).unwrap_err(),
            Error::SingularGeometry
        );
        // Just past the tolerance it still fails; clearly separated it works.
        let almost = r0 * 2.0 + Vector3::new(0.0, 0.0, 1e-12);
        assert!(build_frame(&r0, &almost, false).is_err());
        assert!(build_frame(&r0, &Vector3::new(0.0, 0.0, 0.0), false).is_err());
    }

    #[test]
    fn local_inertial_round_trip() {
        let f = build_frame(
            &Vector3::new(8000.0, -300.0, 2000.0),
            &Vector3::new(1000.0, 42164.0, -8000.0),
            false,
        )
        .unwrap();
        let v = Vector3::new(1.5, -2.25, 0.75);
        let round = f.to_local(&f.to_inertial(&v));
        assert_relative_eq!(round, v, epsilon = 1e-14);
        let w = Vector3::new(-3.0, 0.5, 9.0);
        let round = f.to_inertial(&f.to_local(&w));
        assert_relative_eq!(round, w, epsilon = 1e-14);
        // rotation() columns agree with to_inertial on basis vectors.
        let rot = f.rotation();
        assert_relative_eq!(rot * v, f.to_inertial(&v), epsilon = 1e-14);
    }

    #[test]
    fn mean_frequency_covers_the_sweep() {
        let tof = 4600.0;
        let theta = 2.0 * PI / 3.0;
        assert_abs_diff_eq!(mean_frequency(theta, 0, tof) * tof, theta, epsilon = 1e-12);
        assert_abs_diff_eq!(
            mean_frequency(theta, 2, tof) * tof,
            theta + 4.0 * PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn canonical_scaling_normalizes_mu() {
        let s = Scaling::canonical(42164.0, 398600.4418);
        let mu_scaled = 398600.4418 * s.time * s.time / (s.length * s.length * s.length);
        assert_relative_eq!(mu_scaled, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.velocity() * s.time, s.length, epsilon = 1e-14);
    }
}
