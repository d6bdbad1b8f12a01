//! Target functions with analytic mixed derivatives, used as oracles for the
//! coefficient integral and for error/rate measurements. All registered
//! functions vanish on the boundary of the unit cube.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::sync::Arc;

type ValueFn<R> = Arc<dyn Fn(&[R]) -> R + Send + Sync>;
/// Evaluates the mixed derivative D^orders f at a point; `orders` gives the
/// per-direction derivative order.
type MixedDerivFn<R> = Arc<dyn Fn(&[u32], &[R]) -> R + Send + Sync>;

#[derive(Clone)]
pub struct KorobovTestFn<R: Real> {
    pub name: String,
    pub value: ValueFn<R>,
    pub mixed_derivative: MixedDerivFn<R>,
    pub boundary_zero: bool,
    pub dim: usize,
}

impl<R: Real> KorobovTestFn<R> {
    pub fn eval(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    pub fn mixed_deriv(&self, orders: &[u32], x: &[R]) -> R {
        (self.mixed_derivative)(orders, x)
    }

    /// Sampled check that the function vanishes on every face of the cube.
    pub fn check_boundary_zero(&self, samples_per_face: usize) -> bool {
        let d = self.dim;
        let mut x = vec![R::zero(); d];
        for j in 0..d {
            for face in [R::zero(), R::one()] {
                for t in 0..samples_per_face {
                    for (k, xk) in x.iter_mut().enumerate() {
                        *xk = if k == j {
                            face
                        } else {
                            R::from_f64((t as f64 + 0.5) / samples_per_face as f64)
                        };
                    }
                    if self.eval(&x).abs() > R::from_f64(1e-12) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn deriv_sin_pi<R: Real>(order: u32, x: R) -> R {
    // d^r/dx^r sin(pi x) = pi^r sin(pi x + r pi/2)
    let pi = R::from_f64(std::f64::consts::PI);
    let shift = R::from_f64(order as f64 * std::f64::consts::FRAC_PI_2);
    pi.powi(order as i32) * (pi * x + shift).sin()
}

fn deriv_bubble1<R: Real>(order: u32, x: R) -> R {
    // x(1-x) = x - x^2
    match order {
        0 => x * (R::one() - x),
        1 => R::one() - R::from_f64(2.0) * x,
        2 => R::from_f64(-2.0),
        _ => R::zero(),
    }
}

fn deriv_quartic<R: Real>(order: u32, x: R) -> R {
    // x^2 (1-x)^2 = x^2 - 2x^3 + x^4
    let c = |v: f64| R::from_f64(v);
    match order {
        0 => x * x - c(2.0) * x * x * x + x * x * x * x,
        1 => c(2.0) * x - c(6.0) * x * x + c(4.0) * x * x * x,
        2 => c(2.0) - c(12.0) * x + c(12.0) * x * x,
        3 => c(-12.0) + c(24.0) * x,
        4 => c(24.0),
        _ => R::zero(),
    }
}

fn product_fn<R: Real>(
    name: &str,
    d: usize,
    f1: fn(u32, R) -> R,
) -> KorobovTestFn<R> {
    let value: ValueFn<R> = {
        Arc::new(move |x: &[R]| x.iter().fold(R::one(), |acc, &xi| acc * f1(0, xi)))
    };
    let mixed: MixedDerivFn<R> = {
        Arc::new(move |orders: &[u32], x: &[R]| {
            orders
                .iter()
                .zip(x)
                .fold(R::one(), |acc, (&r, &xi)| acc * f1(r, xi))
        })
    };
    KorobovTestFn {
        name: name.to_string(),
        value,
        mixed_derivative: mixed,
        boundary_zero: true,
        dim: d,
    }
}

/// prod_j sin(pi x_j)
pub fn sinprod<R: Real>(d: usize) -> KorobovTestFn<R> {
    product_fn("sinprod", d, deriv_sin_pi::<R>)
}

/// prod_j x_j (1 - x_j)
pub fn polyprod<R: Real>(d: usize) -> KorobovTestFn<R> {
    product_fn("polyprod", d, deriv_bubble1::<R>)
}

/// prod_j x_j^2 (1 - x_j)^2, a flatter bump with higher-order boundary decay
pub fn bubble<R: Real>(d: usize) -> KorobovTestFn<R> {
    product_fn("bubble", d, deriv_quartic::<R>)
}

/// f == 0, handy for degenerate-path tests.
pub fn zero_fn<R: Real>(d: usize) -> KorobovTestFn<R> {
    KorobovTestFn {
        name: "zero".into(),
        value: Arc::new(|_| R::zero()),
        mixed_derivative: Arc::new(|_, _| R::zero()),
        boundary_zero: true,
        dim: d,
    }
}

pub fn by_name<R: Real>(name: &str, d: usize) -> Result<KorobovTestFn<R>> {
    match name {
        "sinprod" => Ok(sinprod(d)),
        "polyprod" => Ok(polyprod(d)),
        "bubble" => Ok(bubble(d)),
        _ => Err(Error::UnknownTestFunction(name.to_string())),
    }
}
