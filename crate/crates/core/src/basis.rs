//! Higher-order hierarchical Lagrange bases. A univariate basis of degree
//! alpha at node (l, i) is the polynomial that is 1 at the node and 0 at
//! its alpha nearest hierarchical ancestors, restricted to the support
//! [x - h, x + h]; the tensor basis is the product over directions.

use crate::error::{Error, Result};
use crate::index::{ancestors, dyadic, HierNode, MultiIndex};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// Degree rule alpha(m, l) = min(m, l + 1), componentwise; every entry >= 2.
pub fn basis_degree(m: u32, level: &MultiIndex) -> Result<MultiIndex> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("degree parameter m = {m} < 2")));
    }
    Ok(level.0.iter().map(|&l| m.min(l + 1)).collect::<Vec<_>>().into())
}

/// One univariate basis function, nodes precomputed.
///
/// `nodes` holds the alpha Lagrange zeros in ancestor order: x + h, x - h,
/// then coarser ancestors from the chain.
#[derive(Debug, Clone)]
pub struct Basis1D<R: Real> {
    pub level: u32,
    pub index: u32,
    pub degree: u32,
    pub center: R,
    pub mesh: R,
    pub nodes: Vec<R>,
}

impl<R: Real> Basis1D<R> {
    pub fn new(level: u32, index: u32, degree: u32) -> Result<Self> {
        if degree < 2 || degree > level + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} outside [2, l+1] at level {level}"
            )));
        }
        let center = dyadic::<R>(level, index);
        let mesh = R::from_f64(0.5).powi(level as i32);
        let nodes = ancestors::<R>(level, index, degree as usize)?;
        Ok(Basis1D {
            level,
            index,
            degree,
            center,
            mesh,
            nodes,
        })
    }

    pub fn support(&self) -> (R, R) {
        (self.center - self.mesh, self.center + self.mesh)
    }

    /// Lagrange product inside the support, 0 outside. The degree-2 case
    /// reduces to the parabola 1 - ((x - x_li)/h)^2.
    pub fn eval(&self, x: R) -> R {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return R::zero();
        }
        let mut v = R::one();
        for &xk in &self.nodes {
            v = v * (x - xk) / (self.center - xk);
        }
        v
    }

    /// L_p norm over the support by Gauss-Legendre quadrature (the basis is
    /// one polynomial of fixed sign on its support). `p = None` means the
    /// sup norm, estimated by dense sampling.
    pub fn lp_norm(&self, p: Option<f64>) -> R {
        match p {
            None => {
                let samples = 10_000usize;
                let (lo, hi) = self.support();
                let mut mx = R::zero();
                for t in 0..=samples {
                    let x = lo + (hi - lo) * R::from_f64(t as f64 / samples as f64);
                    let v = self.eval(x).abs();
                    if v > mx {
                        mx = v;
                    }
                }
                mx
            }
            Some(p) => {
                let (lo, hi) = self.support();
                let rule = gauss_legendre::<R>(24);
                let mut acc = R::zero();
                // split at the center; |phi|^p may lose polynomiality for odd p
                for (a, b) in [(lo, self.center), (self.center, hi)] {
                    let half = (b - a) * R::from_f64(0.5);
                    let mid = (a + b) * R::from_f64(0.5);
                    for (t, w) in rule.iter() {
                        let x = mid + half * *t;
                        acc = acc + *w * half * self.eval(x).abs().powf(R::from_f64(p));
                    }
                }
                acc.powf(R::from_f64(1.0 / p))
            }
        }
    }
}

/// Tensor-product basis over all directions of a node.
pub fn eval_basis_tensor<R: Real>(node: &HierNode, degrees: &MultiIndex, x: &[R]) -> R {
    debug_assert_eq!(node.dim(), x.len());
    let mut v = R::one();
    for j in 0..node.dim() {
        let b = Basis1D::<R>::new(node.level.0[j], node.index.0[j], degrees.0[j])
            .expect("valid basis");
        v = v * b.eval(x[j]);
        if v == R::zero() {
            return v;
        }
    }
    v
}

/// Right-hand side of the L_p bound for the tensor basis:
/// 1.117^d * 2^(d/p) * 2^(-|l|_1/p); the p = infinity case is 1.117^d.
pub fn basis_lp_bound(level: &MultiIndex, p: Option<f64>) -> f64 {
    let d = level.dim() as f64;
    match p {
        None => 1.117f64.powf(d),
        Some(p) => {
            1.117f64.powf(d) * 2f64.powf(d / p) * 2f64.powf(-(level.norm1() as f64) / p)
        }
    }
}

/// Tensor L_p norm = product of the univariate norms.
pub fn basis_lp_norm<R: Real>(node: &HierNode, degrees: &MultiIndex, p: Option<f64>) -> R {
    let mut v = R::one();
    for j in 0..node.dim() {
        let b = Basis1D::<R>::new(node.level.0[j], node.index.0[j], degrees.0[j])
            .expect("valid basis");
        v = v * b.lp_norm(p);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degree_rule() {
        assert_eq!(
            basis_degree(3, &vec![1, 4].into()).unwrap().0,
            vec![2, 3]
        );
        assert_eq!(
            basis_degree(2, &vec![1, 5, 2].into()).unwrap().0,
            vec![2, 2, 2]
        );
        assert_eq!(
            basis_degree(5, &vec![1, 2, 3].into()).unwrap().0,
            vec![2, 3, 4]
        );
        assert!(basis_degree(1, &vec![1].into()).is_err());
    }

    #[test]
    fn quadratic_is_parabola() {
        let b = Basis1D::<f64>::new(1, 1, 2).unwrap();
        assert_eq!(b.eval(0.5), 1.0);
        assert_eq!(b.eval(0.25), 0.75);
        for t in 0..=20 {
            let x = t as f64 / 20.0;
            let parabola = (1.0 - ((x - 0.5) / 0.5).powi(2)).max(0.0);
            assert_abs_diff_eq!(b.eval(x), parabola, epsilon = 1e-15);
        }
    }

    #[test]
    fn lagrange_conditions() {
        for (l, i, a) in [(4u32, 3u32, 3u32), (3, 5, 3), (5, 11, 4), (2, 1, 3)] {
            let b = Basis1D::<f64>::new(l, i, a).unwrap();
            assert_abs_diff_eq!(b.eval(b.center), 1.0, epsilon = 1e-12);
            for &xk in &b.nodes {
                assert!(b.eval(xk).abs() <= 1e-12, "phi({xk}) != 0 at ({l},{i},{a})");
            }
        }
    }

    #[test]
    fn zero_outside_support() {
        let b = Basis1D::<f64>::new(3, 5, 3).unwrap();
        assert_eq!(b.eval(0.1), 0.0);
        assert_eq!(b.eval(0.9), 0.0);
    }

    #[test]
    fn tensor_at_node_is_one() {
        let node = HierNode::new(vec![2, 3], vec![1, 5]).unwrap();
        let degrees: MultiIndex = vec![2, 2].into();
        let x = node.coordinates::<f64>();
        assert_abs_diff_eq!(eval_basis_tensor(&node, &degrees, &x), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_example_d2() {
        let node = HierNode::new(vec![1, 1], vec![1, 1]).unwrap();
        let degrees: MultiIndex = vec![2, 2].into();
        assert_abs_diff_eq!(
            eval_basis_tensor(&node, &degrees, &[0.25f64, 0.5]),
            0.75,
            epsilon = 1e-15
        );
        // out-of-support factor kills the product
        assert_eq!(eval_basis_tensor(&node, &degrees, &[1.5f64, 0.5]), 0.0);
    }

    #[test]
    fn l1_norm_of_level1_parabola() {
        let b = Basis1D::<f64>::new(1, 1, 2).unwrap();
        assert_abs_diff_eq!(b.lp_norm(Some(1.0)), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.lp_norm(None), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn disjoint_supports_within_level() {
        // fixed l, different i: supports intersect in measure zero
        for l in 1..=5u32 {
            let mut prev_hi = -1.0f64;
            for i in (1..(1u32 << l)).step_by(2) {
                let b = Basis1D::<f64>::new(l, i, 2).unwrap();
                let (lo, hi) = b.support();
                assert!(lo >= prev_hi - 1e-15);
                prev_hi = hi;
            }
        }
    }
}
