//! Error type shared by every fallible operation in the crate.

/// Everything that can go wrong while setting up or solving a transfer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated (degree too low, empty
    /// node set, mismatched lengths, non-positive time of flight, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    /// The boundary vectors are collinear (or one is zero), so the transfer
    /// plane — and with it the sweep angle — is undefined.
    #[error("singular transfer geometry: boundary vectors do not span a plane")]
    SingularGeometry,

    /// A trajectory evaluation produced a radius below the degeneracy
    /// threshold, where the gravitational term is no longer meaningful.
    #[error("degenerate radius: trajectory passed too close to the origin")]
    DegenerateRadius,

    /// The least-squares system lost column rank; the step is not defined.
    #[error("rank-deficient least-squares system")]
    RankDeficient,

    /// The adaptive integrator drove the step size below the representable
    /// limit at time `t` without meeting its error target.
    #[error("integrator step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    /// An iterative reference solver ran out of its iteration budget.
    #[error("no convergence within {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    /// A sample time fell outside the trajectory's domain `[0, tof]`.
    #[error("time {t} outside trajectory domain [0, {tof}]")]
    OutOfDomain { t: f64, tof: f64 },

    /// Too few samples to determine the requested fit.
    #[error("need at least {needed} samples for the fit, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
