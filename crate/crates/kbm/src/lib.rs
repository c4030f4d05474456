//! Spectral toolkit for the kinetic Brownian motion generator on compact
//! hyperbolic surfaces.
//!
//! The generator acts on the unit tangent bundle `SM` of a genus `g >= 2`
//! hyperbolic surface. Harmonic analysis splits `L^2(SM)` into irreducible
//! unitary representations of `PSL(2, R)`, and inside each representation the
//! rescaled generator becomes a one-parameter family
//!
//! ```text
//! T(x) = -Xi^2 + x H,        x = 2 / gamma,
//! ```
//!
//! acting on the ladder of K-isotypic vectors. This crate builds truncated
//! matrix models of that family, follows the low eigenvalue as the coupling
//! varies, expands it in a convergent perturbation series with explicit error
//! envelopes, certifies resolvent bounds and spectral projections by contour
//! quadrature, propagates the associated semigroup, and reassembles the
//! pieces into the equilibrium expansion at the surface level.
//!
//! # Quick example
//!
//! The low eigenvalue of the coupled family in the principal series with
//! Casimir parameter `lambda = 5`, compared with its quadratic Taylor term
//! `lambda x^2 / 8`:
//!
//! ```
//! use kbm::rep::{RepresentationModel, SeriesKind, TruncationWindow};
//! use kbm::spectral::low_eigenvalue;
//!
//! let rep = RepresentationModel::new(SeriesKind::Principal { s: 2.0 }).unwrap();
//! let x = 0.05;
//! let mu = low_eigenvalue(&rep, x, TruncationWindow::symmetric(40)).unwrap();
//! let quadratic = 5.0 * x * x / 8.0;
//! assert!((mu - quadratic).norm() < 1e-5);
//! ```
//!
//! # Module map
//!
//! - [`rep`]: representation parameters, K-type ladders, truncation windows.
//! - [`operator`]: the matrices `Xi`, `H`, `B`, the Casimir, `T(x)`, and
//!   Sobolev weights.
//! - [`eigen`]: dense nonsymmetric eigensolver (Schur based) with residuals.
//! - [`spectral`]: spectra, resolvent norms, Riesz projections, truncation
//!   selection.
//! - [`perturbation`]: Taylor coefficients of the low eigenvalue, convergence
//!   radii, error envelopes, and eigenvalue trajectories in the original
//!   time scale.
//! - [`expm`]: matrix exponential (scaling and squaring).
//! - [`semigroup`]: propagation of `e^{-t T(x)}`, the vertical-line contour
//!   alternative, and certified decay defects.
//! - [`surface`]: decomposition registries from Laplace-spectrum data,
//!   section coefficients, and the equilibrium expansion.

pub mod eigen;
pub mod error;
pub mod expm;
pub mod operator;
pub mod perturbation;
pub mod rep;
pub mod semigroup;
pub mod spectral;
pub mod surface;

pub use error::{Error, Result};
