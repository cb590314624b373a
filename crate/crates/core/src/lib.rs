//! Linear Riemann–Hilbert problems `2 Re[conj(G) f] = φ` on the unit disc,
//! including symbols whose determinant vanishes to finite order at `ζ = 1`.
//!
//! The crate is organised in layers:
//!
//! - [`laurent`], [`matrix`]: exact (or floating) Laurent polynomial algebra.
//! - [`spaces`]: the boundary function spaces `R_m`, the maps between them,
//!   the Szegő projection and FFT sampling.
//! - [`blocks`]: one- and two-dimensional constrained problems.
//! - [`index`]: Maslov and partial indices, factorization checks,
//!   classification and explicit kernels.
//! - [`reduce`]: reduction of a singular symbol to an invertible one plus
//!   vanishing-order constraints.
//! - [`spectral`]: a truncated Fourier discretization used as a numerical
//!   oracle for every index formula.
//!
//! All algebra is generic over a real field (see [`scalar::Real`]); the
//! aliases below fix the two fields used in practice.

pub mod blocks;
pub mod builtin;
pub mod error;
pub mod index;
pub mod io;
pub mod laurent;
pub mod linalg;
pub mod matrix;
pub mod reduce;
pub mod scalar;
pub mod spaces;
pub mod spectral;

pub use error::{Result, RhError};
pub use laurent::LaurentPoly;
pub use matrix::SymbolMatrix;
pub use scalar::{Cx, Rational, Real};

/// Laurent polynomial with Gaussian-rational coefficients.
pub type ExactPoly = LaurentPoly<Rational>;
/// Laurent polynomial with double precision coefficients.
pub type Poly64 = LaurentPoly<f64>;
/// Laurent polynomial with single precision coefficients.
pub type Poly32 = LaurentPoly<f32>;

pub type ExactMatrix = SymbolMatrix<Rational>;
pub type Matrix64 = SymbolMatrix<f64>;
