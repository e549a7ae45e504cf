//! Universal-variable two-body boundary-value solver.
//!
//! The classical single-revolution formulation over the universal variable
//! `z`: time of flight as a function of `z` through the Stumpff functions,
//! solved by a safeguarded Newton iteration (bisection fallback inside a
//! bracketing interval), then velocities from the Lagrange `f`/`g`
//! coefficients. Serves as the unperturbed oracle the collocation solver is
//! validated against.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::tfc::geometry::GEOMETRY_TOLERANCE;

/// Iteration budget for the root solve; exceeding it reports failure
/// rather than returning a half-converged answer.
const MAX_ITER: usize = 200;

/// Stumpff `C(z) = (1 - cos√z)/z`, series near zero.
fn stumpff_c(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        // 1/2! - z/4! + z²/6! - z³/8! + z⁴/10! ...
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..=6 {
            term *= -z / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
            sum += term;
        }
        sum
    } else if z > 0.0 {
        let s = z.sqrt();
        (1.0 - s.cos()) / z
    } else {
        let s = (-z).sqrt();
        (s.cosh() - 1.0) / (-z)
    }
}

/// Stumpff `S(z) = (√z - sin√z)/√z³`, series near zero.
fn stumpff_s(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        // 1/3! - z/5! + z²/7! - z³/9! ...
        let mut term = 1.0 / 6.0;
        let mut sum = term;
        for k in 1..=6 {
            term *= -z / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
            sum += term;
        }
        sum
    } else if z > 0.0 {
        let s = z.sqrt();
        (s - s.sin()) / (z * s)
    } else {
        let s = (-z).sqrt();
        (s.sinh() - s) / ((-z) * s)
    }
}

struct TofEquation {
    r_sum: f64,
    a: f64,
    sqrt_mu_tof: f64,
}

impl TofEquation {
    fn y(&self, z: f64) -> f64 {
        let c = stumpff_c(z);
        self.r_sum + self.a * (z * stumpff_s(z) - 1.0) / c.sqrt()
    }

    /// `F(z) = (y/C)^{3/2} S + A√y - √μ ΔT`; defined where `y > 0`.
    fn f(&self, z: f64) -> Option<f64> {
        let y = self.y(z);
        if !(y > 0.0) {
            return None;
        }
        let c = stumpff_c(z);
        let s = stumpff_s(z);
        Some((y / c).powf(1.5) * s + self.a * y.sqrt() - self.sqrt_mu_tof)
    }

    /// `dF/dz`, for the Newton step.
    fn df(&self, z: f64) -> Option<f64> {
        let y = self.y(z);
        if !(y > 0.0) {
            return None;
        }
        let c = stumpff_c(z);
        let s = stumpff_s(z);
        Some(if z.abs() < 1e-8 {
            let sq2 = 2.0_f64.sqrt();
            sq2 / 40.0 * y.powf(1.5) + self.a / 8.0 * (y.sqrt() + self.a * (1.0 / (2.0 * y)).sqrt())
        } else {
            (y / c).powf(1.5)
                * (0.5 / z * (c - 1.5 * s / c) + 0.75 * s * s / c)
                + self.a / 8.0 * (3.0 * s / c * y.sqrt() + self.a * (c / y).sqrt())
        })
    }
}

/// Solves the single-revolution two-body boundary-value problem.
///
/// Returns `(v0, vf)` in the input units. `long_way` selects the arc
/// sweeping more than half a revolution. Fails with
/// [`Error::SingularGeometry`] for (near-)collinear boundary vectors —
/// including the 180° transfer, where the plane is ambiguous — and with
/// [`Error::NoConvergence`] if the time-of-flight equation does not settle
/// within 200 iterations.
pub fn lambert_universal(
    mu: f64,
    r0: &Vector3<f64>,
    rf: &Vector3<f64>,
    tof: f64,
    long_way: bool,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(
            "gravitational parameter must be positive and finite",
        ));
    }
    if !(tof > 0.0) || !tof.is_finite() {
        return Err(Error::InvalidArgument("time of flight must be positive"));
    }
    let r1 = r0.norm();
    let r2 = rf.norm();
    if !(r1 > 0.0) || !(r2 > 0.0) {
        return Err(Error::InvalidArgument(
            "boundary positions must be nonzero vectors",
        ));
    }
    let cross_norm = r0.cross(rf).norm();
    if cross_norm <= GEOMETRY_TOLERANCE * r1 * r2 {
        return Err(Error::SingularGeometry);
    }
    let cos_dnu = (r0.dot(rf) / (r1 * r2)).clamp(-1.0, 1.0);
    let sin_dnu = if long_way {
        -cross_norm / (r1 * r2)
    } else {
        cross_norm / (r1 * r2)
    };
    let a = sin_dnu * (r1 * r2 / (1.0 - cos_dnu)).sqrt();

    let eq = TofEquation {
        r_sum: r1 + r2,
        a,
        sqrt_mu_tof: mu.sqrt() * tof,
    };

    // F is increasing in z and defined only where y > 0; approaching the
    // y = 0 boundary from the defined side, F → -√μ ΔT < 0, so treating the
    // undefined region as "negative" keeps the bracketing sound.
    let f_signed = |z: f64| -> f64 {
        match eq.f(z) {
            Some(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    // Bracket the root: the single-revolution branch lives below z = (2π)².
    let z_top = 4.0 * core::f64::consts::PI * core::f64::consts::PI * (1.0 - 1e-9);
    let mut z_hi = z_top;
    while f_signed(z_hi) <= 0.0 {
        z_hi -= 0.05 * z_top;
        if z_hi < -1.0 {
            return Err(Error::NoConvergence { max_iter: MAX_ITER });
        }
    }
    let mut z_lo = z_hi.min(0.0) - 1e-3;
    let mut expand = 1.0_f64;
    let mut guard = 0usize;
    while f_signed(z_lo) > 0.0 {
        z_hi = z_lo;
        z_lo -= expand;
        expand *= 2.0;
        guard += 1;
        if guard > 100 {
            return Err(Error::NoConvergence { max_iter: MAX_ITER });
        }
    }

    // Safeguarded Newton within [z_lo, z_hi]: bisect whenever the Newton
    // step is unusable or escapes the bracket.
    let mut z = 0.5 * (z_lo + z_hi);
    let tol_f = 1e-13 * eq.sqrt_mu_tof.abs();
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let fz = f_signed(z);
        if fz.abs() <= tol_f {
            converged = true;
            break;
        }
        if fz > 0.0 {
            z_hi = z;
        } else {
            z_lo = z;
        }
        let newton = fz
            .is_finite()
            .then(|| eq.df(z))
            .flatten()
            .filter(|d| d.is_finite() && d.abs() > 0.0)
            .map(|d| z - fz / d);
        z = match newton {
            Some(zn) if zn > z_lo && zn < z_hi => zn,
            _ => 0.5 * (z_lo + z_hi),
        };
        if (z_hi - z_lo).abs() <= f64::EPSILON * (1.0 + z.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { max_iter: MAX_ITER });
    }

    let y = eq.y(z);
    if !(y > 0.0) {
        return Err(Error::NoConvergence { max_iter: MAX_ITER });
    }
    let f = 1.0 - y / r1;
    let g = a * (y / mu).sqrt();
    let g_dot = 1.0 - y / r2;
    if g == 0.0 || !g.is_finite() {
        return Err(Error::SingularGeometry);
    }
    let v0 = (rf - f * r0) / g;
    let vf = (g_dot * rf - r0) / g;
    Ok((v0, vf))
}
