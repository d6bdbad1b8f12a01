//! Sparse-grid interpolation with higher-order hierarchical Lagrange bases,
//! and constructive synthesis of deep ReLU convolutional networks that realize
//! the interpolants, together with numeric checks of every error and depth
//! bound the construction promises.
//!
//! The crate is organized around three layers:
//!
//! - grid machinery: hierarchical nodes, bases, hierarchization, quadrature
//!   oracles for the interpolation coefficients (`index`, `basis`,
//!   `interpolant`, `coeff`, `quadrature`);
//! - CNN machinery: Toeplitz convolution layers, exact evaluation over any
//!   scalar ring (f32/f64 or exact rationals), a shallow-to-deep compiler,
//!   and gadget networks for squaring, products and zero elimination
//!   (`cnn`, `interval`, `shallow`, `gadgets`);
//! - end-to-end synthesis plus measurement harnesses (`synthesis`, `rates`,
//!   `applemma`).
//!
//! Core numeric code is generic over the scalar type via [`scalar::Scalar`]
//! (ring + ReLU) and [`scalar::Real`] (adds `Float`); concrete aliases for
//! the common instantiations live at the crate root.

pub mod applemma;
pub mod basis;
pub mod cnn;
pub mod coeff;
pub mod error;
pub mod gadgets;
pub mod index;
pub mod interpolant;
pub mod interval;
pub mod quadrature;
pub mod rates;
pub mod scalar;
pub mod shallow;
pub mod synthesis;
pub mod testfn;

pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};

/// Double-precision interpolant, the default working type.
pub type Interpolant = interpolant::SparseGridInterpolant<f64>;
/// Double-precision network with output weights.
pub type DeepCnn = cnn::DeepCnn<f64>;
/// Exact-rational network, used by conformance tests of small gadgets.
pub type DeepCnnRational = cnn::DeepCnn<Rational>;
/// Double-precision convolution stack without output weights.
pub type ConvNet = cnn::ConvNet<f64>;
