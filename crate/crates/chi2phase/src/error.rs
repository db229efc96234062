//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by grid construction, decompositions and propagation.
#[derive(Debug, Error)]
pub enum Error {
    /// Two mode functions do not live on the same frequency grid.
    #[error("mode functions are defined on different frequency grids")]
    GridMismatch,

    /// An argument violated a documented range or sign constraint.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Gram-Schmidt hit a (numerically) linearly dependent seed mode.
    #[error("rank-deficient mode set: seed mode {index} has residual norm {residual:.3e}")]
    RankDeficient { index: usize, residual: f64 },

    /// Frequency outside the validity window of the dispersion model.
    #[error("frequency {omega:.6e} rad/s outside dispersion validity window [{min:.6e}, {max:.6e}]")]
    DispersionRange { omega: f64, min: f64, max: f64 },

    /// The frequency grid does not cover a required band.
    #[error("grid coverage failure: {0}")]
    Coverage(String),

    /// theta_K = theta_J within tolerance; the first-order map is undefined.
    #[error("degenerate regime: theta_K = {theta_k:.6e} and theta_J = {theta_j:.6e} coincide")]
    DegenerateRegime { theta_k: f64, theta_j: f64 },

    /// A matrix had the wrong shape (odd dimension, non-square, ...).
    #[error("shape error: {0}")]
    Shape(String),

    /// A documented precondition did not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A matrix that must be nonsingular is numerically singular.
    /// Carries the offending null direction when one is identifiable.
    #[error("numerical degeneracy: {detail}")]
    Degenerate {
        detail: String,
        null_direction: Option<Vec<f64>>,
    },

    /// The square core of a GBMD is singular and cannot be inverted.
    #[error("singular core matrix: smallest singular value {sigma_min:.3e}")]
    SingularCore { sigma_min: f64 },

    /// A covariance matrix has a symplectic eigenvalue below 1.
    #[error("unphysical state: smallest symplectic eigenvalue {nu_min} < 1")]
    Unphysical { nu_min: f64 },

    /// A Wigner window is too small for the requested operation.
    #[error("window too small: edge mass {edge_mass:.3e} exceeds 1e-9")]
    Window { edge_mass: f64 },

    /// I/O failure while reading or writing a data file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed CSV or binary payload.
    #[error("format error: {0}")]
    Format(String),
}
