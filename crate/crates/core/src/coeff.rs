//! Integral representation of hierarchical surpluses. Per direction, the
//! surplus at a node x_c of level l is the defect of f against the polynomial
//! interpolating f at the node set N = {parent} u {parent's basis nodes}
//! (N = {0, 1} at level 1). With the boundary values of a Korobov function
//! vanishing, that defect has the Peano representation
//!
//!   v = int K(t) f^(r)(t) dt,   r = |N| = 1 + min(m, l),
//!   K(t) = [ (x_c - t)_+^(r-1) - sum_k lambda_k (x_k - t)_+^(r-1) ] / (r-1)!
//!
//! with lambda the Lagrange weights of N at x_c. Writing the truncated-power
//! sum over the points {x_c} u N with weights 1/Omega'(.) recovers the
//! w'/s-form of the classical coefficient lemma. In d dimensions the kernel
//! factorizes and pairs with the mixed derivative of per-direction orders r_j.

use crate::basis::basis_degree;
use crate::error::Result;
use crate::index::{ancestors, dyadic, parent_1d, HierNode, MultiIndex};
use crate::quadrature::integrate_box_adaptive;
use crate::scalar::Real;
use crate::testfn::KorobovTestFn;

/// One direction of the surplus kernel.
#[derive(Debug, Clone)]
pub struct CoeffKernel1D<R: Real> {
    pub center: R,
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
    /// derivative order the kernel pairs with: 1 + min(m, l)
    pub order: u32,
}

impl<R: Real> CoeffKernel1D<R> {
    pub fn new(m: u32, l: u32, i: u32) -> Result<Self> {
        let center = dyadic::<R>(l, i);
        let nodes: Vec<R> = match parent_1d(l, i) {
            None => vec![R::one(), R::zero()],
            Some((pl, pi)) => {
                let pa = m.min(pl + 1); // parent basis degree
                let mut n = vec![dyadic::<R>(pl, pi)];
                n.extend(ancestors::<R>(pl, pi, pa as usize)?);
                n
            }
        };
        let order = nodes.len() as u32;
        debug_assert_eq!(order, 1 + m.min(l));
        let mut weights = Vec::with_capacity(nodes.len());
        for k in 0..nodes.len() {
            let mut num = R::one();
            let mut den = R::one();
            for (j, &xj) in nodes.iter().enumerate() {
                if j != k {
                    num = num * (center - xj);
                    den = den * (nodes[k] - xj);
                }
            }
            weights.push(num / den);
        }
        Ok(CoeffKernel1D {
            center,
            nodes,
            weights,
            order,
        })
    }

    pub fn eval(&self, t: R) -> R {
        let e = (self.order - 1) as i32;
        let clip = |v: R| if v > R::zero() { v.powi(e) } else { R::zero() };
        let mut acc = clip(self.center - t);
        for (&xk, &lk) in self.nodes.iter().zip(&self.weights) {
            acc = acc - lk * clip(xk - t);
        }
        let mut fact = 1.0f64;
        for q in 2..=e as u64 {
            fact *= q as f64;
        }
        acc / R::from_f64(fact)
    }

    /// Kernel kinks: the center and every node.
    pub fn breakpoints(&self) -> Vec<R> {
        let mut b = self.nodes.clone();
        b.push(self.center);
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }
}

/// v_{l,i} by tensor quadrature of the factorized kernel against the mixed
/// derivative D^(r_1,...,r_d) f. Adaptive refinement; errors out if two
/// successive refinements stay apart.
pub fn coefficient_integral<R: Real>(
    f: &KorobovTestFn<R>,
    node: &HierNode,
    m: u32,
) -> Result<R> {
    let d = node.dim();
    let kernels: Vec<CoeffKernel1D<R>> = (0..d)
        .map(|j| CoeffKernel1D::new(m, node.level.0[j], node.index.0[j]))
        .collect::<Result<_>>()?;
    let orders: Vec<u32> = kernels.iter().map(|k| k.order).collect();
    let breaks: Vec<Vec<R>> = kernels.iter().map(|k| k.breakpoints()).collect();
    let lo = vec![R::zero(); d];
    let hi = vec![R::one(); d];
    let integrand = |x: &[R]| -> R {
        let mut w = R::one();
        for (j, k) in kernels.iter().enumerate() {
            w = w * k.eval(x[j]);
        }
        if w == R::zero() {
            return R::zero();
        }
        w * f.mixed_deriv(&orders, x)
    };
    integrate_box_adaptive(&integrand, &lo, &hi, &breaks, 1e-9)
}

/// c(alpha) = prod_j 2^(a_j (a_j + 1)/2) / (a_j + 1)!
pub fn c_alpha(alpha: &MultiIndex) -> f64 {
    alpha
        .0
        .iter()
        .map(|&a| {
            let mut fact = 1.0f64;
            for q in 2..=(a as u64 + 1) {
                fact *= q as f64;
            }
            2f64.powi((a * (a + 1) / 2) as i32) / fact
        })
        .product()
}

/// Right side of the coefficient bound:
/// c(alpha) 2^(-d - |l . alpha|_1 - |l|_1/p') * ||D^(alpha+1) f||_{L_p(supp)}.
/// `p = None` is the sup norm (p' = 1). The derivative norm is measured by
/// quadrature / sampling over the support box of the tensor basis.
pub fn coefficient_bound<R: Real>(
    f: &KorobovTestFn<R>,
    node: &HierNode,
    alpha: &MultiIndex,
    p: Option<f64>,
) -> Result<f64> {
    let d = node.dim();
    let orders: Vec<u32> = alpha.0.iter().map(|&a| a + 1).collect();
    let lo: Vec<R> = (0..d)
        .map(|j| (node.coordinate::<R>(j) - node.mesh::<R>(j)).max(R::zero()))
        .collect();
    let hi: Vec<R> = (0..d)
        .map(|j| (node.coordinate::<R>(j) + node.mesh::<R>(j)).min(R::one()))
        .collect();
    let norm = match p {
        None => {
            // sup over a dense deterministic sample of the support box
            let steps = 64usize;
            let mut mx = 0.0f64;
            let mut idx = vec![0usize; d];
            let mut x = vec![R::zero(); d];
            'outer: loop {
                for j in 0..d {
                    let t = R::from_f64(idx[j] as f64 / steps as f64);
                    x[j] = lo[j] + (hi[j] - lo[j]) * t;
                }
                let v = f.mixed_deriv(&orders, &x).abs().to_f64().unwrap();
                mx = mx.max(v);
                let mut j = d;
                loop {
                    if j == 0 {
                        break 'outer;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] <= steps {
                        break;
                    }
                    idx[j] = 0;
                }
            }
            mx
        }
        Some(p) => {
            let breaks: Vec<Vec<R>> = vec![Vec::new(); d];
            let integrand = |x: &[R]| -> R {
                f.mixed_deriv(&orders, x).abs().powf(R::from_f64(p))
            };
            integrate_box_adaptive(&integrand, &lo, &hi, &breaks, 1e-9)?
                .to_f64()
                .unwrap()
                .powf(1.0 / p)
        }
    };
    let pprime_inv = match p {
        None => 1.0,              // p = inf -> p' = 1
        Some(p) => 1.0 - 1.0 / p, // 1/p' = 1 - 1/p
    };
    let l_dot_alpha: f64 = node
        .level
        .0
        .iter()
        .zip(&alpha.0)
        .map(|(&l, &a)| (l * a) as f64)
        .sum();
    let exp = -(d as f64) - l_dot_alpha - node.level.norm1() as f64 * pprime_inv;
    Ok(c_alpha(alpha) * 2f64.powf(exp) * norm)
}

/// Check |v| against the coefficient bound for a computed surplus.
pub fn check_coefficient_bound<R: Real>(
    f: &KorobovTestFn<R>,
    node: &HierNode,
    m: u32,
    surplus: R,
    p: Option<f64>,
    quad_tol: f64,
) -> Result<bool> {
    let alpha = basis_degree(m, &node.level)?;
    let bound = coefficient_bound(f, node, &alpha, p)?;
    Ok(surplus.abs().to_f64().unwrap() <= bound + quad_tol)
}
