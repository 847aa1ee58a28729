//! Exact phase-space quantization of the Pais-Uhlenbeck oscillator.
//!
//! Polynomials with exact rational (or complex rational, or quadratic-surd)
//! coefficients carry the Moyal star product, its Bopp-shift operators and the
//! Gaussian-times-polynomial function class in which Wigner functions, their
//! star-genvalue residuals and time evolution stay closed. Floating point enters
//! only through quadrature: position-space wavefunctions, the Dirac integral
//! transform, Wigner inversion and inner products.
//!
//! The arithmetic is generic over the coefficient type through [`scalar::Ring`];
//! the aliases below name the instantiations used throughout.

pub mod canon;
pub mod diffop;
pub mod error;
pub mod evolution;
pub mod gauss;
pub mod grid;
pub mod moyal;
pub mod poly;
pub mod pu;
pub mod quadrature;
pub mod scalar;
pub mod specfun;
pub mod wavefn;
pub mod wigner;

pub use canon::Surd;
pub use diffop::DiffOperator;
pub use error::{Error, Result};
pub use gauss::{GaussPoly, QuadForm};
pub use moyal::PairSignature;
pub use poly::{Monomial, Poly, VarId};
pub use pu::PuParams;
pub use quadrature::QuadratureSpec;
pub use scalar::{QuadExt, Rational, Scalar};
pub use wigner::{Frame, WignerFunction, WignerState};

/// Polynomial with exact complex-rational coefficients.
pub type ExactPoly = Poly<Scalar>;
/// Polynomial with exact real-rational coefficients.
pub type RationalPoly = Poly<Rational>;
/// Polynomial with double-precision complex coefficients.
pub type FloatPoly = Poly<num_complex::Complex64>;
/// Gaussian times polynomial with exact complex-rational coefficients.
pub type ExactGaussPoly = GaussPoly<Scalar>;
