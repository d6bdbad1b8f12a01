//! Explicit CNN gadget constructions: sawtooth/squaring networks, zero
//! elimination, approximate vector products, and signed sums of k-fold
//! products, each paired with its closed-form semantic oracle and a depth
//! formula the built network must stay under.

pub mod builder;
pub mod elim;
pub mod poly;
pub mod ru;
pub mod vecprod;

pub use builder::GadgetAssembler;
pub use elim::build_elimzeros;
pub use poly::{build_polynomial_net, PolynomialNet};
pub use ru::{build_ru_network, RuNetwork};
pub use vecprod::{build_vectorprod, VecProdNet};

use crate::cnn::ConvNet;

/// i-fold composition of the tent map T_1(x) = 2x on [0,1/2], 2(1-x) on (1/2,1].
pub fn sawtooth_eval(i: u32, x: f64) -> f64 {
    let mut v = x;
    for _ in 0..i {
        v = if v <= 0.5 { 2.0 * v } else { 2.0 * (1.0 - v) };
    }
    v
}

/// R_U as the sawtooth sum x - sum_{i=1..U} T_i(x)/4^i.
pub fn ru_eval_sum(u: u32, x: f64) -> f64 {
    let mut acc = x;
    for i in 1..=u {
        acc -= sawtooth_eval(i, x) / 4f64.powi(i as i32);
    }
    acc
}

/// R_U as the piecewise linear interpolant of x^2 at the knots i/2^U:
/// on [i/2^U, (i+1)/2^U] it is (2i+1)/2^U (x - i/2^U) + (i/2^U)^2.
pub fn ru_eval(u: u32, x: f64) -> f64 {
    let scale = (1u64 << u) as f64;
    let i = ((x * scale).floor() as i64).clamp(0, (1i64 << u) - 1) as f64;
    let knot = i / scale;
    (2.0 * i + 1.0) / scale * (x - knot) + knot * knot
}

/// The approximate product 2M^2 [R_U((x+y)/2M) - R_U(x/M)/4 - R_U(y/M)/4]
/// for x, y in [0, M].
pub fn approx_product_eval(m_bound: f64, u: u32, x: f64, y: f64) -> f64 {
    let m2 = 2.0 * m_bound * m_bound;
    m2 * (ru_eval(u, (x + y) / (2.0 * m_bound))
        - 0.25 * ru_eval(u, x / m_bound)
        - 0.25 * ru_eval(u, y / m_bound))
}

/// Chained approximate product of one k-tuple with the escalating bounds
/// M_j (M_1 = M, M_{j+1} = M_j^2 for M >= 1); the semantic oracle for the
/// polynomial network.
pub fn chain_product_eval(m_bound: f64, u: u32, values: &[f64]) -> f64 {
    let mut acc = values[0];
    let mut mj = m_bound;
    for &v in &values[1..] {
        acc = approx_product_eval(mj, u, acc, v);
        mj = stage_bound_next(m_bound, mj);
    }
    acc
}

/// M_{j+1} from M_j: squares for M >= 1, capped at M below 1.
pub fn stage_bound_next(m_base: f64, mj: f64) -> f64 {
    if m_base >= 1.0 {
        mj * mj
    } else {
        m_base
    }
}

/// A built gadget: the conv stack, where its declared payload lives in the
/// final hidden state, and the depth formula it promises to respect.
#[derive(Debug, Clone)]
pub struct GadgetNet {
    pub net: ConvNet<f64>,
    pub payload_offset: usize,
    pub payload_len: usize,
    pub depth_bound: f64,
    pub builder: &'static str,
}

impl GadgetNet {
    pub fn payload(&self, x: &[f64]) -> crate::error::Result<Vec<f64>> {
        let h = self.net.eval_hidden(x)?;
        Ok(h[self.payload_offset..self.payload_offset + self.payload_len].to_vec())
    }
}

/// Depth formulas from the gadget statements.
pub mod depth {
    /// squaring network: (7U+15) L / (s-1) + 3U + 2
    pub fn ru(u: u32, l: usize, s: usize) -> f64 {
        (7.0 * u as f64 + 15.0) * l as f64 / (s as f64 - 1.0) + 3.0 * u as f64 + 2.0
    }
    /// zero elimination: l * ceil((n-1) k / (s-1))
    pub fn elim(l: usize, k: usize, n: usize, s: usize) -> f64 {
        l as f64 * (((n - 1) * k + s - 2) / (s - 1)) as f64
    }
    /// vector product: (128+14U) l k / (s-1) + 3U + 61
    pub fn vecprod(u: u32, l: usize, k: usize, s: usize) -> f64 {
        (128.0 + 14.0 * u as f64) * (l * k) as f64 / (s as f64 - 1.0) + 3.0 * u as f64 + 61.0
    }
    /// polynomial network: (256+28U) d l k^2 / (s-1) + (3U+61) k
    pub fn polynomial(u: u32, d: usize, l: usize, k: usize, s: usize) -> f64 {
        (256.0 + 28.0 * u as f64) * (d * l * k * k) as f64 / (s as f64 - 1.0)
            + (3.0 * u as f64 + 61.0) * k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_map_points() {
        assert_eq!(sawtooth_eval(1, 0.5), 1.0);
        assert_eq!(sawtooth_eval(2, 0.25), 1.0); // T_1(1/4) = 1/2, T_1(1/2) = 1
        for i in 1..=6 {
            assert_eq!(sawtooth_eval(i, 0.0), 0.0);
        }
    }

    #[test]
    fn ru_forms_agree() {
        for u in 1..=8u32 {
            for t in 0..=1000 {
                let x = t as f64 / 1000.0;
                assert!(
                    (ru_eval(u, x) - ru_eval_sum(u, x)).abs() <= 1e-14,
                    "forms differ at U={u} x={x}"
                );
            }
        }
    }

    #[test]
    fn ru_at_knots_and_midpoint() {
        assert_eq!(ru_eval(1, 0.5), 0.25);
        assert_eq!(ru_eval(3, 0.0), 0.0);
        assert_eq!(ru_eval(3, 1.0), 1.0);
        for u in 1..=8u32 {
            let x = (0.5f64).powi(u as i32 + 1); // midpoint of the first segment
            let gap = ru_eval(u, x) - x * x;
            let extremal = (0.25f64).powi(u as i32 + 1);
            assert!((gap - extremal).abs() <= 1e-16, "U={u}: {gap} vs {extremal}");
        }
    }

    #[test]
    fn ru_error_band() {
        for u in 1..=8u32 {
            let bound = (0.25f64).powi(u as i32 + 1);
            for t in 0..=4096 {
                let x = t as f64 / 4096.0;
                let gap = ru_eval(u, x) - x * x;
                assert!(gap >= -1e-15 && gap <= bound + 1e-15);
            }
        }
    }

    #[test]
    fn product_examples() {
        assert_eq!(approx_product_eval(1.0, 4, 0.0, 0.0), 0.0);
        assert!((approx_product_eval(1.0, 4, 1.0, 1.0) - 1.0).abs() <= 1e-15);
        // xtilde(x, x) = R_U(x)
        for t in 0..=100 {
            let x = t as f64 / 100.0;
            assert!((approx_product_eval(1.0, 3, x, x) - ru_eval(3, x)).abs() <= 1e-14);
        }
    }

    #[test]
    fn product_error_and_range() {
        for m in [1.0f64, 2.0] {
            for u in [2u32, 4] {
                let bound = m * m / 4f64.powi(u as i32);
                for i in 0..=64 {
                    for j in 0..=64 {
                        let x = m * i as f64 / 64.0;
                        let y = m * j as f64 / 64.0;
                        let v = approx_product_eval(m, u, x, y);
                        assert!((v - x * y).abs() <= bound + 1e-13);
                        assert!(v >= -1e-13 && v <= m * m + 1e-13);
                    }
                }
            }
        }
    }
}
