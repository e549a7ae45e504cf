//! Orthogonal polynomial bases, collocation nodes, and the mixed
//! polynomial + trigonometric row used by the constrained functionals.
//!
//! All three supported families satisfy a three-term recurrence
//!
//! ```text
//! D_n C_{n+1}(z) = A_n z C_n(z) - B_n C_{n-1}(z)
//! ```
//!
//! which is evaluated iteratively together with its first and second
//! derivatives. Degrees 0 and 1 span exactly the affine functions absorbed
//! by the boundary-constraint terms of the functionals, so the basis row
//! starts at degree 2 and is augmented with one cosine/sine pair at the
//! problem's mean angular frequency to capture the dominant oscillation of
//! the transfer. For a polynomial degree `m` the row has `m + 1` entries:
//! `[C_2(z), ..., C_m(z), cos(ω t), sin(ω t)]`.
//!
//! The domain variable is `z ∈ [-1, 1]`, mapped linearly to time by
//! `t = ΔT (z + 1) / 2`; derivative rows are taken with respect to `t`
//! (polynomial entries pick up powers of `c = 2/ΔT`, the trigonometric
//! entries differentiate directly).

use alloc::{vec, vec::Vec};
use nalgebra::DVector;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Orthogonal polynomial family used for the free-function expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    /// Legendre polynomials `P_n` (weight 1).
    Legendre,
    /// Chebyshev polynomials of the first kind `T_n` (weight `(1-z²)^{-1/2}`).
    Chebyshev,
    /// Gegenbauer (ultraspherical) polynomials `C_n^{(α)}`
    /// (weight `(1-z²)^{α-1/2}`). Requires `α ≥ -1/2` and `α ≠ 0`;
    /// `α = 1/2` reproduces Legendre and `α = 1` the Chebyshev second kind.
    Gegenbauer { alpha: f64 },
}

impl BasisKind {
    fn validate(&self) -> Result<()> {
        if let BasisKind::Gegenbauer { alpha } = self {
            if !alpha.is_finite() || *alpha == 0.0 || *alpha < -0.5 {
                return Err(Error::InvalidArgument(
                    "gegenbauer alpha must be finite, nonzero, and at least -1/2",
                ));
            }
        }
        Ok(())
    }

    /// Recurrence coefficients `(A_n, B_n, D_n)` advancing degree `n` to `n+1`.
    ///
    /// For integer-valued coefficient sequences (Legendre, Gegenbauer at
    /// `α = 1/2`) these are exact in floating point, so families that are
    /// mathematically identical evaluate bit-for-bit identically.
    fn recurrence(&self, n: usize) -> (f64, f64, f64) {
        let nf = n as f64;
        match self {
            BasisKind::Legendre => (2.0 * nf + 1.0, nf, nf + 1.0),
            BasisKind::Chebyshev => (2.0, 1.0, 1.0),
            BasisKind::Gegenbauer { alpha } => {
                (2.0 * (nf + alpha), nf + 2.0 * alpha - 1.0, nf + 1.0)
            }
        }
    }

    /// Value and slope of the degree-1 member (`C_1(z) = c1 z`).
    fn degree_one_slope(&self) -> f64 {
        match self {
            BasisKind::Legendre | BasisKind::Chebyshev => 1.0,
            BasisKind::Gegenbauer { alpha } => 2.0 * alpha,
        }
    }
}

/// Chebyshev-Gauss-Lobatto collocation nodes on `[-1, 1]`.
///
/// The nodes are `z_k = -cos(π k / (n-1))` for `k = 0..n`, ordered
/// ascending. The set is constructed by mirroring one half so that it is
/// exactly symmetric (`z_{n-1-k} = -z_k` bitwise), with exact `±1`
/// endpoints and, for odd `n`, an exact central zero.
pub fn cgl_nodes(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 collocation nodes (the endpoints)",
        ));
    }
    let mut z = vec![0.0; n];
    let denom = (n - 1) as f64;
    for k in 0..n / 2 {
        let v = -(core::f64::consts::PI * k as f64 / denom).cos();
        z[k] = v;
        z[n - 1 - k] = -v;
    }
    // cos(0) = 1 exactly, so the endpoints are exact; the loop above leaves
    // the middle entry of an odd-length set at exactly zero.
    Ok(z)
}

/// Evaluates one polynomial family at `z` for all degrees `0..=m`.
///
/// Returns `(values, d/dz, d²/dz²)`, each of length `m + 1`. The recurrence
/// is valid for any real `z`; callers that care about orthogonality should
/// stay within `[-1, 1]`.
pub fn ortho_eval(kind: &BasisKind, m: usize, z: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    kind.validate()?;
    let mut val = vec![0.0; m + 1];
    let mut d1 = vec![0.0; m + 1];
    let mut d2 = vec![0.0; m + 1];
    val[0] = 1.0;
    if m == 0 {
        return Ok((val, d1, d2));
    }
    let c1 = kind.degree_one_slope();
    val[1] = c1 * z;
    d1[1] = c1;
    for n in 1..m {
        let (a, b, d) = kind.recurrence(n);
        val[n + 1] = (a * z * val[n] - b * val[n - 1]) / d;
        d1[n + 1] = (a * (val[n] + z * d1[n]) - b * d1[n - 1]) / d;
        d2[n + 1] = (a * (2.0 * d1[n] + z * d2[n]) - b * d2[n - 1]) / d;
    }
    Ok((val, d1, d2))
}

/// Fully specified expansion basis: polynomial family and degree plus the
/// trigonometric pair's angular frequency `ω` and the time of flight `ΔT`
/// that fixes the `z ↔ t` map.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    /// Highest polynomial degree `m`; the row holds degrees `2..=m` plus the
    /// two trigonometric entries, `m + 1` columns in total.
    pub degree: usize,
    /// Angular frequency of the trigonometric pair. `ω = 0` degenerates the
    /// pair to a constant and a zero column; that is permitted for testing
    /// but unsuitable for solving.
    pub omega: f64,
    /// Time of flight `ΔT > 0`.
    pub tof: f64,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, degree: usize, omega: f64, tof: f64) -> Result<Self> {
        kind.validate()?;
        if degree < 2 {
            return Err(Error::InvalidArgument(
                "basis degree must be at least 2 (degrees 0 and 1 are reserved for the constraints)",
            ));
        }
        if !(tof > 0.0) || !tof.is_finite() {
            return Err(Error::InvalidArgument("time of flight must be positive"));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::InvalidArgument(
                "trigonometric frequency must be finite and nonnegative",
            ));
        }
        Ok(Self {
            kind,
            degree,
            omega,
            tof,
        })
    }

    /// Number of columns in a basis row (`m + 1`).
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain-map slope `c = dz/dt = 2/ΔT`.
    pub fn time_scale(&self) -> f64 {
        2.0 / self.tof
    }

    /// Physical time of a domain point, `t = ΔT (z + 1) / 2`.
    pub fn time_of(&self, z: f64) -> f64 {
        self.tof * (z + 1.0) / 2.0
    }

    /// Domain point of a physical time, `z = 2 t / ΔT - 1`.
    pub fn z_of(&self, t: f64) -> f64 {
        2.0 * t / self.tof - 1.0
    }
}

/// One evaluation of the basis row and its first two time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRows {
    /// `s(z) = [C_2(z), ..., C_m(z), cos(ω t), sin(ω t)]`
    pub s: DVector<f64>,
    /// `ds/dt`
    pub ds: DVector<f64>,
    /// `d²s/dt²`
    pub dds: DVector<f64>,
}

/// Evaluates the mixed basis row at domain point `z`.
pub fn basis_rows(spec: &BasisSpec, z: f64) -> Result<BasisRows> {
    let m = spec.degree;
    let (val, d1, d2) = ortho_eval(&spec.kind, m, z)?;
    let c = spec.time_scale();
    let c2 = c * c;
    let n = spec.len();
    let mut s = DVector::zeros(n);
    let mut ds = DVector::zeros(n);
    let mut dds = DVector::zeros(n);
    for j in 2..=m {
        s[j - 2] = val[j];
        ds[j - 2] = c * d1[j];
        dds[j - 2] = c2 * d2[j];
    }
    let (sin, cos) = (spec.omega * spec.time_of(z)).sin_cos();
    let w = spec.omega;
    s[m - 1] = cos;
    s[m] = sin;
    ds[m - 1] = -w * sin;
    ds[m] = w * cos;
    dds[m - 1] = -w * w * cos;
    dds[m] = -w * w * sin;
    Ok(BasisRows { s, ds, dds })
}
