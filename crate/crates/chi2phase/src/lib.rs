//! Numerical toolkit for pulsed multimode quantum light undergoing a
//! second-order (chi^(2)) nonlinear interaction, described in phase space.
//!
//! The crate builds the broadband-mode quadrature input-output maps of an
//! electro-optic style up-conversion, reduces mismatched input/output mode
//! counts with a generalized Bloch-Messiah decomposition, and evaluates
//! output Wigner functions, covariance matrices and Gaussian entropies.
//!
//! Module map:
//! - [`spectral`]: frequency grids, quadrature rules, broadband mode
//!   functions, inner products and Gram-Schmidt orthogonalization.
//! - [`chi2`]: dispersion, phase matching, the squeezing/beam-splitting
//!   kernels and the first-order-unitary reduction.
//! - [`symplectic`]: symplectic forms and tests, Bloch-Messiah and its
//!   rectangular generalization, symplectic eigenvalues, entropy.
//! - [`phasespace`]: quadrature maps (A, B), Gaussian propagation, Fock
//!   output Wigner functions and a brute-force convolution oracle.
//! - [`scenario`]: wiring of the two reference experiments (single-mode
//!   Fock up-conversion, two-mode squeezed vacuum) and sweep records.

pub mod chi2;
pub mod error;
pub mod phasespace;
pub mod scenario;
pub mod special;
pub mod spectral;
pub mod symplectic;
pub mod units;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
