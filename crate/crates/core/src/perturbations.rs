//! Perturbing-acceleration models and their analytic Jacobians.
//!
//! Every model exposes the acceleration `a_p(r, ṙ, t)` together with its
//! partial derivatives `∂a_p/∂r` and `∂a_p/∂ṙ`, which the collocation
//! Jacobian and the shooting sensitivity both consume. The three concrete
//! models — oblateness (J2), point-mass third body, and solar radiation
//! pressure on a fixed-attitude flat plate — are all velocity-independent,
//! so `∂a_p/∂ṙ` defaults to zero.
//!
//! Models are unit-agnostic: parameters must be expressed in the same
//! length/time system as the states they are called with. [`ScaledModel`]
//! adapts a model built in physical units to a solver working in
//! nondimensional units.

use alloc::boxed::Box;
use alloc::sync::Arc;
use nalgebra::{Matrix3, Vector3};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::tfc::geometry::Scaling;

/// Radius (squared-norm) floor below which model evaluations are refused as
/// singular rather than returning astronomically large numbers.
const SINGULAR_RADIUS: f64 = 1e-30;

/// A perturbing acceleration with analytic state partials.
///
/// Implementations must be pure functions of their arguments (no interior
/// mutability observable across calls) and are shared across threads during
/// parameter sweeps.
pub trait PerturbationModel: Send + Sync {
    /// Perturbing acceleration at position `r`, velocity `v`, time `t`.
    fn accel(&self, r: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<Vector3<f64>>;

    /// `∂a_p/∂r` at the same state.
    fn jac_r(&self, r: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<Matrix3<f64>>;

    /// `∂a_p/∂ṙ`; zero for velocity-independent models.
    fn jac_v(&self, _r: &Vector3<f64>, _v: &Vector3<f64>, _t: f64) -> Result<Matrix3<f64>> {
        Ok(Matrix3::zeros())
    }
}

/// Conventional Earth oblateness coefficient.
pub const EARTH_J2: f64 = 1.082629e-3;
/// Earth equatorial radius in kilometres.
pub const EARTH_EQUATORIAL_RADIUS_KM: f64 = 6378.137;

/// Second zonal harmonic of an oblate primary, in the primary's
/// equator-aligned frame:
///
/// ```text
/// a = -(3 J2 μ R²)/(2 r⁵) [ x(1 - 5(z/r)²), y(1 - 5(z/r)²), z(3 - 5(z/r)²) ]
/// ```
///
/// The `scale` factor multiplies the whole acceleration; it exists to
/// exaggerate the perturbation in stress cases and is 1 for physical runs.
#[derive(Debug, Clone, PartialEq)]
pub struct J2Perturbation {
    pub mu: f64,
    pub j2: f64,
    pub r_eq: f64,
    pub scale: f64,
}

impl J2Perturbation {
    pub fn new(mu: f64, j2: f64, r_eq: f64) -> Self {
        Self {
            mu,
            j2,
            r_eq,
            scale: 1.0,
        }
    }

    /// Earth values in kilometre/second units.
    pub fn earth(mu: f64) -> Self {
        Self::new(mu, EARTH_J2, EARTH_EQUATORIAL_RADIUS_KM)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// `3 J2 μ R² / 2`, the common prefactor.
    fn k(&self) -> f64 {
        1.5 * self.scale * self.j2 * self.mu * self.r_eq * self.r_eq
    }
}

impl PerturbationModel for J2Perturbation {
    fn accel(&self, r: &Vector3<f64>, _v: &Vector3<f64>, _t: f64) -> Result<Vector3<f64>> {
        let r2 = r.norm_squared();
        if r2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let rn = r2.sqrt();
        let r5 = r2 * r2 * rn;
        let zeta2 = r.z * r.z / r2;
        let k = self.k() / r5;
        Ok(Vector3::new(
            -k * r.x * (1.0 - 5.0 * zeta2),
            -k * r.y * (1.0 - 5.0 * zeta2),
            -k * r.z * (3.0 - 5.0 * zeta2),
        ))
    }

    fn jac_r(&self, r: &Vector3<f64>, _v: &Vector3<f64>, _t: f64) -> Result<Matrix3<f64>> {
        let r2 = r.norm_squared();
        if r2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let rn = r2.sqrt();
        let r7 = r2 * r2 * r2 * rn;
        let (x, y, z) = (r.x, r.y, r.z);
        let z2 = z * z;
        let zeta2 = z2 / r2;
        let k = self.k() / r7;
        // Direct differentiation of the acceleration above. The resulting
        // matrix is symmetric and trace-free (the potential is harmonic),
        // which the tests verify.
        let xx = k * (5.0 * x * x + 5.0 * z2 - r2 - 35.0 * x * x * zeta2);
        let yy = k * (5.0 * y * y + 5.0 * z2 - r2 - 35.0 * y * y * zeta2);
        let zz = k * (30.0 * z2 - 3.0 * r2 - 35.0 * z2 * zeta2);
        let xy = k * 5.0 * x * y * (1.0 - 7.0 * zeta2);
        let xz = k * 5.0 * x * z * (3.0 - 7.0 * zeta2);
        let yz = k * 5.0 * y * z * (3.0 - 7.0 * zeta2);
        Ok(Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz))
    }
}

/// Point-mass third body: direct attraction on the spacecraft minus the
/// indirect acceleration of the primary,
///
/// ```text
/// a = μ₃ [ (r₃ - r)/|r₃ - r|³ - r₃/|r₃|³ ]
/// ```
///
/// The body's position is supplied by an arbitrary ephemeris function of
/// time.
pub struct ThirdBodyPerturbation {
    pub mu_third: f64,
    ephemeris: Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync>,
}

impl ThirdBodyPerturbation {
    pub fn new(
        mu_third: f64,
        ephemeris: Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync>,
    ) -> Self {
        Self { mu_third, ephemeris }
    }

    pub fn body_position(&self, t: f64) -> Vector3<f64> {
        (self.ephemeris)(t)
    }
}

impl PerturbationModel for ThirdBodyPerturbation {
    fn accel(&self, r: &Vector3<f64>, _v: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let r3 = self.body_position(t);
        let d = r3 - r;
        let d2 = d.norm_squared();
        let r3n2 = r3.norm_squared();
        if d2 <= SINGULAR_RADIUS || r3n2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let d3 = d2 * d2.sqrt();
        let r3n3 = r3n2 * r3n2.sqrt();
        Ok(self.mu_third * (d / d3 - r3 / r3n3))
    }

    fn jac_r(&self, r: &Vector3<f64>, _v: &Vector3<f64>, t: f64) -> Result<Matrix3<f64>> {
        let d = self.body_position(t) - r;
        let d2 = d.norm_squared();
        if d2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let d3 = d2 * d2.sqrt();
        let d5 = d3 * d2;
        // ∂/∂r of the direct term; the indirect term does not depend on r.
        Ok(self.mu_third * (3.0 / d5 * d * d.transpose() - Matrix3::identity() / d3))
    }
}

/// Solar radiation pressure on a flat plate of fixed inertial attitude:
///
/// ```text
/// a = (P A / m) cos β [ (ρ_a + ρ_d) ŝ + (2 ρ_s cos β + ⅔ ρ_d) n̂ ]
/// ```
///
/// where `ŝ` is the sun→spacecraft unit vector, `n̂` the plate normal,
/// `cos β = n̂·ŝ`, and `ρ_a + ρ_s + ρ_d` the absorbed/specular/diffuse
/// fractions. The model does not shadow the plate: a negative `cos β`
/// (back-side illumination) changes sign rather than switching off, so keep
/// the normal sun-facing over the arc. Reflectance fractions that do not
/// sum to one are accepted — [`SrpPerturbation::rho_sum`] lets callers
/// decide whether to warn.
pub struct SrpPerturbation {
    /// Radiation pressure `P` (force per area) times plate area over mass,
    /// pre-divided: acceleration magnitude scale in problem units.
    pub pressure: f64,
    pub area: f64,
    pub mass: f64,
    pub rho_absorbed: f64,
    pub rho_specular: f64,
    pub rho_diffuse: f64,
    normal: Vector3<f64>,
    sun: Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync>,
}

impl SrpPerturbation {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pressure: f64,
        area: f64,
        mass: f64,
        rho_absorbed: f64,
        rho_specular: f64,
        rho_diffuse: f64,
        normal: Vector3<f64>,
        sun: Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync>,
    ) -> Result<Self> {
        if !(mass > 0.0) || !(area >= 0.0) || !(pressure >= 0.0) {
            return Err(Error::InvalidArgument(
                "srp needs positive mass and nonnegative area and pressure",
            ));
        }
        if rho_absorbed < 0.0 || rho_specular < 0.0 || rho_diffuse < 0.0 {
            return Err(Error::InvalidArgument(
                "reflectance fractions must be nonnegative",
            ));
        }
        let nn = normal.norm();
        if !(nn > 0.0) || !nn.is_finite() {
            return Err(Error::InvalidArgument(
                "plate normal must be a nonzero finite vector",
            ));
        }
        Ok(Self {
            pressure,
            area,
            mass,
            rho_absorbed,
            rho_specular,
            rho_diffuse,
            normal: normal / nn,
            sun,
        })
    }

    /// Plate normal (unit length).
    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    /// Sum of the reflectance fractions; 1 for a physically consistent
    /// plate.
    pub fn rho_sum(&self) -> f64 {
        self.rho_absorbed + self.rho_specular + self.rho_diffuse
    }

    pub fn sun_position(&self, t: f64) -> Vector3<f64> {
        (self.sun)(t)
    }

    fn coefficient(&self) -> f64 {
        self.pressure * self.area / self.mass
    }
}

impl PerturbationModel for SrpPerturbation {
    fn accel(&self, r: &Vector3<f64>, _v: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let u = r - self.sun_position(t);
        let s2 = u.norm_squared();
        if s2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let s_hat = u / s2.sqrt();
        let cos_b = self.normal.dot(&s_hat);
        let c = self.coefficient();
        Ok(c * cos_b
            * ((self.rho_absorbed + self.rho_diffuse) * s_hat
                + (2.0 * self.rho_specular * cos_b + 2.0 / 3.0 * self.rho_diffuse)
                    * self.normal))
    }

    fn jac_r(&self, r: &Vector3<f64>, _v: &Vector3<f64>, t: f64) -> Result<Matrix3<f64>> {
        let u = r - self.sun_position(t);
        let s2 = u.norm_squared();
        if s2 <= SINGULAR_RADIUS {
            return Err(Error::DegenerateRadius);
        }
        let s = s2.sqrt();
        let s_hat = u / s;
        let cos_b = self.normal.dot(&s_hat);
        // ∂ŝ/∂r = (I - ŝŝᵀ)/s and ∂cosβ/∂r = (n̂ - cosβ ŝ)/s; chain rule on
        // the acceleration above.
        let proj = (Matrix3::identity() - s_hat * s_hat.transpose()) / s;
        let grad_cos = (self.normal - cos_b * s_hat) / s;
        let c = self.coefficient();
        let ad = self.rho_absorbed + self.rho_diffuse;
        Ok(c * (ad * (s_hat * grad_cos.transpose() + cos_b * proj)
            + self.normal
                * ((4.0 * self.rho_specular * cos_b + 2.0 / 3.0 * self.rho_diffuse)
                    * grad_cos)
                    .transpose()))
    }
}

/// Circular, planar two-body ephemeris: a body on a circle of given radius
/// about the origin in the `xy` plane, phase measured from `+x` at `t = 0`,
/// mean motion `n = sqrt(μ_primary / radius³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularEphemeris {
    pub radius: f64,
    pub mean_motion: f64,
    pub phase: f64,
}

/// Mean Earth-Moon distance in kilometres, used by the lunar convenience
/// constructor.
pub const MOON_ORBIT_RADIUS_KM: f64 = 384_000.0;

impl CircularEphemeris {
    pub fn new(radius: f64, mu_primary: f64, phase: f64) -> Result<Self> {
        if !(radius > 0.0) || !(mu_primary > 0.0) {
            return Err(Error::InvalidArgument(
                "circular ephemeris needs positive radius and gravitational parameter",
            ));
        }
        Ok(Self {
            radius,
            mean_motion: (mu_primary / (radius * radius * radius)).sqrt(),
            phase,
        })
    }

    /// Moon on a circular equatorial orbit (kilometre/second units),
    /// crossing `+x` at `t = 0`.
    pub fn moon(mu_earth: f64) -> Self {
        Self::new(MOON_ORBIT_RADIUS_KM, mu_earth, 0.0).expect("constants are positive")
    }

    pub fn position(&self, t: f64) -> Vector3<f64> {
        let (s, c) = (self.phase + self.mean_motion * t).sin_cos();
        Vector3::new(self.radius * c, self.radius * s, 0.0)
    }

    /// Boxed closure form for [`ThirdBodyPerturbation::new`].
    pub fn into_fn(self) -> Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync> {
        Box::new(move |t| self.position(t))
    }
}

/// Piecewise-linear position table, strictly increasing in time. Queries
/// outside the tabulated span clamp to the first/last entry, so callers
/// should check [`TabulatedEphemeris::covers`] against their integration
/// window up front.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedEphemeris {
    times: alloc::vec::Vec<f64>,
    positions: alloc::vec::Vec<Vector3<f64>>,
}

impl TabulatedEphemeris {
    pub fn new(times: alloc::vec::Vec<f64>, positions: alloc::vec::Vec<Vector3<f64>>) -> Result<Self> {
        if times.len() != positions.len() {
            return Err(Error::InvalidArgument(
                "ephemeris times and positions must have equal length",
            ));
        }
        if times.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: times.len(),
            });
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "ephemeris times must be strictly increasing",
            ));
        }
        Ok(Self { times, positions })
    }

    pub fn covers(&self, t_start: f64, t_end: f64) -> bool {
        self.times[0] <= t_start && t_end <= *self.times.last().expect("nonempty")
    }

    pub fn position(&self, t: f64) -> Vector3<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.positions[0];
        }
        if t >= self.times[n - 1] {
            return self.positions[n - 1];
        }
        // partition_point returns the first index with time > t; the
        // segment [idx-1, idx] brackets t.
        let idx = self.times.partition_point(|&ti| ti <= t);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        self.positions[idx - 1] * (1.0 - w) + self.positions[idx] * w
    }

    pub fn into_fn(self) -> Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync> {
        Box::new(move |t| self.position(t))
    }
}

/// Adapts a model whose parameters live in physical units to a caller
/// working in scaled units: states are unscaled before the inner call and
/// the returned acceleration/Jacobians are rescaled.
pub struct ScaledModel {
    inner: Arc<dyn PerturbationModel>,
    scaling: Scaling,
}

impl ScaledModel {
    pub fn new(inner: Arc<dyn PerturbationModel>, scaling: Scaling) -> Self {
        Self { inner, scaling }
    }
}

impl PerturbationModel for ScaledModel {
    fn accel(&self, r: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let s = &self.scaling;
        let a = self.inner.accel(
            &(r * s.length),
            &(v * s.velocity()),
            t * s.time,
        )?;
        Ok(a / s.acceleration())
    }

    fn jac_r(&self, r: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<Matrix3<f64>> {
        let s = &self.scaling;
        let j = self.inner.jac_r(
            &(r * s.length),
            &(v * s.velocity()),
            t * s.time,
        )?;
        // ∂a/∂r picks up time² when both acceleration and length rescale.
        Ok(j * (s.time * s.time))
    }

    fn jac_v(&self, r: &Vector3<f64>, v: &Vector3<f64>, t: f64) -> Result<Matrix3<f64>> {
        let s = &self.scaling;
        let j = self.inner.jac_v(
            &(r * s.length),
            &(v * s.velocity()),
            t * s.time,
        )?;
        Ok(j * s.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fd_jac_r(model: &dyn PerturbationModel, r: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        let v = Vector3::zeros();
        let h = 1e-6 * r.norm().max(1.0);
        let mut j = Matrix3::zeros();
        for c in 0..3 {
            let mut rp = *r;
            let mut rm = *r;
            rp[c] += h;
            rm[c] -= h;
            let ap = model.accel(&rp, &v, t).unwrap();
            let am = model.accel(&rm, &v, t).unwrap();
            j.set_column(c, &((ap - am) / (2.0 * h)));
        }
        j
    }

    fn assert_jacobian_matches_fd(model: &dyn PerturbationModel, r: &Vector3<f64>, t: f64) {
        let analytic = model.jac_r(r, &Vector3::zeros(), t).unwrap();
        let fd = fd_jac_r(model, r, t);
        let scale = analytic.amax().max(fd.amax()).max(1e-300);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    analytic[(i, j)] / scale,
                    fd[(i, j)] / scale,
                    epsilon = 2e-6
                );
            }
        }
    }

    #[test]
    fn j2_accel_matches_hand_values() {
        // On the polar axis the in-plane terms vanish and
        // a_z = -K z (3 - 5) / r⁵ = +2 K / r⁴ with K = 3 J2 μ R²/2.
        let m = J2Perturbation::new(1.0, 1e-3, 0.5);
        let a = m
            .accel(&Vector3::new(0.0, 0.0, 2.0), &Vector3::zeros(), 0.0)
            .unwrap();
        let k = 1.5 * 1e-3 * 0.25;
        assert_abs_diff_eq!(a.x, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(a.y, 0.0, epsilon = 1e-18);
        assert_relative_eq!(a.z, 2.0 * k / 16.0, epsilon = 1e-14);
        // In the equatorial plane a = -K/r⁴ r̂.
        let a = m
            .accel(&Vector3::new(3.0, 0.0, 0.0), &Vector3::zeros(), 0.0)
            .unwrap();
        assert_relative_eq!(a.x, -k / 81.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.z, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn j2_jacobian_is_symmetric_trace_free_and_matches_fd() {
        let m = J2Perturbation::earth(398600.4418);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let r = Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ) * 8000.0
                + Vector3::new(9000.0, 0.0, 0.0);
            if r.norm() < 6600.0 {
                continue;
            }
            let j = m.jac_r(&r, &Vector3::zeros(), 0.0).unwrap();
            assert_relative_eq!(j, j.transpose(), epsilon = 1e-12);
            // The oblateness potential is harmonic away from the body, so
            // its Hessian must be trace-free.
            assert_abs_diff_eq!(j.trace() / j.amax(), 0.0, epsilon = 1e-10);
            assert_jacobian_matches_fd(&m, &r, 0.0);
        }
    }

    #[test]
    fn j2_scale_multiplies_linearly() {
        let base = J2Perturbation::earth(398600.4418);
        let boosted = J2Perturbation::earth(398600.4418).with_scale(10.0);
        let r = Vector3::new(8000.0, -2000.0, 3000.0);
        let a1 = base.accel(&r, &Vector3::zeros(), 0.0).unwrap();
        let a10 = boosted.accel(&r, &Vector3::zeros(), 0.0).unwrap();
        assert_relative_eq!(a10, a1 * 10.0, epsilon = 1e-14);
    }

    #[test]
    fn third_body_cancels_at_the_origin_neighborhood() {
        // At r = 0 the direct and indirect terms cancel exactly.
        let eph = CircularEphemeris::new(384000.0, 398600.4418, 0.3).unwrap();
        let m = ThirdBodyPerturbation::new(4902.8, eph.into_fn());
        let a = m
            .accel(&Vector3::zeros(), &Vector3::zeros(), 1000.0)
            .unwrap();
        assert_abs_diff_eq!(a.norm(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn third_body_jacobian_matches_fd() {
        let eph = CircularEphemeris::new(384000.0, 398600.4418, 1.1).unwrap();
        let m = ThirdBodyPerturbation::new(4902.8, eph.into_fn());
        for r in [
            Vector3::new(42164.0, 0.0, 0.0),
            Vector3::new(-20000.0, 300000.0, 5000.0),
            Vector3::new(100000.0, -250000.0, -40000.0),
        ] {
            assert_jacobian_matches_fd(&m, &r, 3600.0);
        }
    }

    #[test]
    fn third_body_rejects_collision_with_the_body() {
        let eph = CircularEphemeris::new(384000.0, 398600.4418, 0.0).unwrap();
        let m = ThirdBodyPerturbation::new(4902.8, eph.into_fn());
        let at_moon = m.body_position(0.0);
        assert_eq!(
            m.accel(&at_moon, &Vector3::zeros(), 0.0).unwrap_err(),
            Error::DegenerateRadius
        );
    }

    fn sun_at_origin() -> Box<dyn Fn(f64) -> Vector3<f64> + Send + Sync> {
        Box::new(|_| Vector3::zeros())
    }

    #[test]
    fn srp_direction_and_magnitude() {
        // Plate face-on to the sun line: a = C (ρa + ρd + 2ρs) ŝ along ŝ
        // when n̂ = ŝ (cos β = 1; the diffuse lobe adds ⅔ρd along n̂).
        let m = SrpPerturbation::new(
            4.57e-6,
            20.0,
            5.0,
            0.2,
            0.5,
            0.3,
            Vector3::new(1.0, 0.0, 0.0),
            sun_at_origin(),
        )
        .unwrap();
        let a = m
            .accel(&Vector3::new(1.5e8, 0.0, 0.0), &Vector3::zeros(), 0.0)
            .unwrap();
        let c = 4.57e-6 * 20.0 / 5.0;
        let expected = c * (0.2 + 0.3 + 2.0 * 0.5 + 2.0 / 3.0 * 0.3);
        assert_relative_eq!(a.x, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(a.y, 0.0, epsilon = 1e-18);

        // Edge-on plate: cos β = 0 kills the whole thing.
        let edge = SrpPerturbation::new(
            4.57e-6,
            20.0,
            5.0,
            0.2,
            0.5,
            0.3,
            Vector3::new(0.0, 1.0, 0.0),
            sun_at_origin(),
        )
        .unwrap();
        let a = edge
            .accel(&Vector3::new(1.5e8, 0.0, 0.0), &Vector3::zeros(), 0.0)
            .unwrap();
        assert_abs_diff_eq!(a.norm(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn srp_jacobian_matches_fd_for_tilted_plates() {
        let m = SrpPerturbation::new(
            1.0e-5,
            100.0,
            50.0,
            0.1,
            0.6,
            0.3,
            Vector3::new(0.6, -0.3, 0.74),
            sun_at_origin(),
        )
        .unwrap();
        for r in [
            Vector3::new(1.0e8, 2.0e7, -5.0e6),
            Vector3::new(-8.0e7, 9.0e7, 3.0e7),
            Vector3::new(5.0e7, -1.2e8, 0.0),
        ] {
            assert_jacobian_matches_fd(&m, &r, 0.0);
        }
    }

    #[test]
    fn srp_face_on_stationary_point() {
        // With n̂ along ŝ and a purely specular plate, cos β sits at its
        // maximum, so the Jacobian reduces to the geometric spreading terms
        // and ∂(cos β)/∂r = 0 there.
        let m = SrpPerturbation::new(
            1.0,
            1.0,
            1.0,
            0.0,
            1.0,
            0.0,
            Vector3::new(1.0, 0.0, 0.0),
            sun_at_origin(),
        )
        .unwrap();
        let j = m
            .jac_r(&Vector3::new(10.0, 0.0, 0.0), &Vector3::zeros(), 0.0)
            .unwrap();
        // grad cos β = 0 and ŝŝᵀ-projection annihilates the ŝ direction:
        // the purely specular face-on case is locally insensitive.
        assert_abs_diff_eq!(j.amax(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn srp_rho_sum_reports_inconsistency() {
        let m = SrpPerturbation::new(
            1.0,
            1.0,
            1.0,
            0.1,
            0.9,
            0.1,
            Vector3::new(1.0, 0.0, 0.0),
            sun_at_origin(),
        )
        .unwrap();
        assert_relative_eq!(m.rho_sum(), 1.1, epsilon = 1e-15);
    }

    #[test]
    fn circular_ephemeris_period_and_plane() {
        let eph = CircularEphemeris::new(384000.0, 398600.4418, 0.0).unwrap();
        let period = 2.0 * core::f64::consts::PI / eph.mean_motion;
        assert_relative_eq!(
            eph.position(0.0),
            Vector3::new(384000.0, 0.0, 0.0),
            epsilon = 1e-9
        );
        assert_relative_eq!(
            eph.position(period),
            eph.position(0.0),
            epsilon = 1e-6 * 384000.0
        );
        assert_abs_diff_eq!(eph.position(12345.0).z, 0.0, epsilon = 1e-18);
        assert_relative_eq!(eph.position(7777.0).norm(), 384000.0, epsilon = 1e-12);
    }

    #[test]
    fn tabulated_ephemeris_interpolates_linearly() {
        let table = TabulatedEphemeris::new(
            alloc::vec![0.0, 10.0, 30.0],
            alloc::vec![
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(10.0, -20.0, 5.0),
                Vector3::new(30.0, 0.0, 10.0),
            ],
        )
        .unwrap();
        assert_relative_eq!(
            table.position(5.0),
            Vector3::new(5.0, -10.0, 2.5),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            table.position(20.0),
            Vector3::new(20.0, -10.0, 7.5),
            epsilon = 1e-14
        );
        // Clamped outside the span.
        assert_eq!(table.position(-1.0), table.position(0.0));
        assert_eq!(table.position(99.0), table.position(30.0));
        assert!(table.covers(0.0, 30.0));
        assert!(!table.covers(0.0, 31.0));

        assert!(TabulatedEphemeris::new(alloc::vec![0.0], alloc::vec![Vector3::zeros()]).is_err());
        assert!(TabulatedEphemeris::new(
            alloc::vec![0.0, 0.0],
            alloc::vec![Vector3::zeros(), Vector3::zeros()]
        )
        .is_err());
    }

    #[test]
    fn scaled_model_round_trips_units() {
        // A scaled J2 model evaluated at scaled states must agree with the
        // physical model evaluated at physical states, converted.
        let mu = 398600.4418;
        let phys = Arc::new(J2Perturbation::earth(mu));
        let scaling = Scaling::canonical(7000.0, mu);
        let scaled = ScaledModel::new(phys.clone(), scaling);
        let r_km = Vector3::new(6800.0, 1500.0, -2500.0);
        let v_kms = Vector3::new(-1.0, 7.2, 0.3);
        let t_s = 500.0;
        let r_nd = r_km / scaling.length;
        let v_nd = v_kms / scaling.velocity();
        let t_nd = t_s / scaling.time;
        let a_km = phys.accel(&r_km, &v_kms, t_s).unwrap();
        let a_nd = scaled.accel(&r_nd, &v_nd, t_nd).unwrap();
        assert_relative_eq!(a_nd, a_km / scaling.acceleration(), epsilon = 1e-13);
        let j_km = phys.jac_r(&r_km, &v_kms, t_s).unwrap();
        let j_nd = scaled.jac_r(&r_nd, &v_nd, t_nd).unwrap();
        assert_relative_eq!(j_nd, j_km * scaling.time * scaling.time, epsilon = 1e-13);
    }
}
