//! Scalar abstraction: CNN evaluation is plain ring arithmetic plus `max(0, .)`,
//! so it runs identically over floats and exact rationals. Grid/quadrature code
//! additionally needs `Float` and uses the [`Real`] bound.

use num_rational::BigRational;
use num_traits::{Float, One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar. Every finite f64 converts exactly.
pub type Rational = BigRational;

/// Ordered ring with ReLU and exact conversion from f64 parameters.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Exact embedding of a (finite) f64 network parameter.
    fn from_f64(x: f64) -> Self;

    /// max(0, x)
    fn relu(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else {
            self
        }
    }

    /// |x| below the payload-detection threshold. Exact types test equality
    /// with zero; floats use a small absolute cutoff (gadget constructions
    /// produce exact zeros, float noise must not break payload extraction).
    fn negligible(&self) -> bool;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn negligible(&self) -> bool {
        self.abs() < 1e-13
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn negligible(&self) -> bool {
        self.abs() < 1e-5
    }
}

impl Scalar for Rational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Floating scalar for grid mathematics (dyadic coordinates, quadrature,
/// error sweeps). Dyadic rationals i * 2^-l are exact in binary floating
/// point up to level 50; levels are capped at 30 throughout.
pub trait Real: Scalar + Float + Div<Output = Self> + 'static {
    fn approx_eq(self, other: Self, tol: f64) -> bool {
        (self - other).abs() <= Self::from_f64(tol)
    }
}

impl Real for f64 {}
impl Real for f32 {}
