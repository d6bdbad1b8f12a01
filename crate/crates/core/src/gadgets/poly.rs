//! Signed sums of k-fold products: the input carries k blocks of width d*l,
//! each block interleaving l values with d-1 leading zeros per value; k-1
//! vector-product rounds contract them to [0_{d-1}; g_1; ...; 0_{d-1}; g_l]
//! with g_i the chained approximate product, and the output weights pick out
//! sum_i c_i g_i.

use super::builder::GadgetAssembler;
use super::vecprod::append_vectorprod;
use super::{chain_product_eval, depth, stage_bound_next, GadgetNet};
use crate::cnn::{DeepCnn, NetMeta};
use crate::error::Result;
use crate::interval::Interval;

#[derive(Debug, Clone)]
pub struct PolynomialNet {
    pub cnn: DeepCnn<f64>,
    /// entry offset of the final [0_{d-1}; g_1; ...; 0_{d-1}; g_l] block
    pub payload_offset: usize,
    pub d: usize,
    pub k: usize,
    pub l: usize,
    pub u: u32,
    pub m_bound: f64,
    pub depth_bound: f64,
    /// M_j ledger across the k-1 product rounds
    pub stage_bounds: Vec<f64>,
    /// depth after each product round, for the induction-bound check
    pub stage_depths: Vec<usize>,
}

impl PolynomialNet {
    /// The theorem's input layout: block i holds [0_{d-1}; y_{1,i}; ...;
    /// 0_{d-1}; y_{l,i}].
    pub fn layout_input(&self, values: &[Vec<f64>]) -> Vec<f64> {
        layout_input(self.d, self.k, self.l, values)
    }

    /// Closed-form oracle for the g_i lanes.
    pub fn chain_oracle(&self, values: &[Vec<f64>], i: usize) -> f64 {
        let tuple: Vec<f64> = (0..self.k).map(|j| values[j][i]).collect();
        chain_product_eval(self.m_bound, self.u, &tuple)
    }

    pub fn g_lane(&self, i: usize) -> usize {
        self.payload_offset + i * self.d + self.d - 1
    }
}

/// values[j][i] = y_{i+1, j+1}; returns the dkl-entry input vector.
pub fn layout_input(d: usize, k: usize, l: usize, values: &[Vec<f64>]) -> Vec<f64> {
    assert_eq!(values.len(), k);
    let mut x = Vec::with_capacity(d * k * l);
    for block in values {
        assert_eq!(block.len(), l);
        for &v in block {
            x.extend(std::iter::repeat(0.0).take(d - 1));
            x.push(v);
        }
    }
    x
}

/// Build the polynomial network for weights c (length l), k >= 2 blocks,
/// interleave width d, inputs in [0, M], accuracy parameter U, filter length s.
pub fn build_polynomial_net(
    c: &[f64],
    k: usize,
    d: usize,
    m_bound: f64,
    u: u32,
    s: usize,
) -> Result<PolynomialNet> {
    assert!(k >= 2 && d >= 1 && !c.is_empty());
    let l = c.len();
    let kv = d * l; // width of one product block
    let mut iv = Vec::with_capacity(d * k * l);
    for _ in 0..k * l {
        iv.extend(std::iter::repeat(Interval::zero()).take(d - 1));
        iv.push(Interval::new(0.0, m_bound));
    }
    let mut asm = GadgetAssembler::new(iv, s);
    let mut off = 0usize;
    let mut mj = m_bound;
    let mut stage_bounds = vec![mj];
    let mut stage_depths = Vec::with_capacity(k - 1);
    for round in 0..k - 1 {
        off = append_vectorprod(&mut asm, off, kv, k - round, mj, u)?;
        mj = stage_bound_next(m_bound, mj);
        stage_bounds.push(mj);
        stage_depths.push(asm.depth());
    }
    let bound = depth::polynomial(u, d, l, k, s);
    debug_assert!(
        (asm.depth() as f64) <= bound,
        "polynomial depth {} exceeds {bound}",
        asm.depth()
    );
    let mut weights = vec![0.0; asm.net.output_width()];
    for (i, &ci) in c.iter().enumerate() {
        weights[off + i * d + d - 1] = ci;
    }
    let cnn = DeepCnn::new(
        asm.net,
        weights,
        NetMeta {
            builder: "polynomial".into(),
            depth_bound_claimed: bound,
        },
    )?;
    Ok(PolynomialNet {
        cnn,
        payload_offset: off,
        d,
        k,
        l,
        u,
        m_bound,
        depth_bound: bound,
        stage_bounds,
        stage_depths,
    })
}

/// GadgetNet view (payload = the final d*l block).
impl PolynomialNet {
    pub fn as_gadget(&self) -> GadgetNet {
        GadgetNet {
            net: self.cnn.net.clone(),
            payload_offset: self.payload_offset,
            payload_len: self.d * self.l,
            depth_bound: self.depth_bound,
            builder: "polynomial",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k2_product_within_theorem_bound() {
        // k=2, l=1, c=(1), M=1, U=6: |output - y z| <= 2^-12 on a grid
        let net = build_polynomial_net(&[1.0], 2, 1, 1.0, 6, 2).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=64 {
            for j in 0..=64 {
                let (y, z) = (i as f64 / 64.0, j as f64 / 64.0);
                let x = net.layout_input(&[vec![y], vec![z]]);
                let out = net.cnn.eval(&x).unwrap();
                worst = worst.max((out - y * z).abs());
            }
        }
        assert!(worst <= (0.5f64).powi(12), "worst {worst}");
    }

    #[test]
    fn zero_inputs_zero_output() {
        let net = build_polynomial_net(&[1.0, -2.0], 3, 1, 1.0, 3, 2).unwrap();
        let x = net.layout_input(&[vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]]);
        assert_eq!(net.cnn.eval(&x).unwrap(), 0.0);
    }

    #[test]
    fn matches_chain_oracle_and_interleave_survives() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (k, l, d, u, s) in [(2usize, 2usize, 1usize, 4u32, 2usize), (3, 2, 2, 4, 2)] {
            let c: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let net = build_polynomial_net(&c, k, d, 1.0, u, s).unwrap();
            assert!((net.cnn.depth() as f64) <= net.depth_bound);
            for _ in 0..20 {
                let values: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..l).map(|_| rng.gen_range(0.0..=1.0)).collect())
                    .collect();
                let x = net.layout_input(&values);
                let h = net.cnn.net.eval_hidden(&x).unwrap();
                for i in 0..l {
                    let got = h[net.g_lane(i)];
                    let want = net.chain_oracle(&values, i);
                    assert!(
                        (got - want).abs() <= 1e-9,
                        "g_{i}: {got} vs {want} (k={k} l={l} d={d})"
                    );
                }
                // interleaved separators stay exactly zero
                for i in 0..l {
                    for e in 0..d - 1 {
                        assert_eq!(h[net.payload_offset + i * d + e], 0.0);
                    }
                }
                let out = net.cnn.eval(&x).unwrap();
                let want: f64 = (0..l).map(|i| c[i] * net.chain_oracle(&values, i)).sum();
                assert!((out - want).abs() <= 1e-9 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn signed_sum_against_exact_products() {
        // k=3, l=2, c=(1,-1), M=1, U=8: |out - (prod y_1 - prod y_2)| <= 2^-13
        let net = build_polynomial_net(&[1.0, -1.0], 3, 1, 1.0, 8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let values: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..2).map(|_| rng.gen_range(0.0..=1.0)).collect())
                .collect();
            let x = net.layout_input(&values);
            let out = net.cnn.eval(&x).unwrap();
            let p1: f64 = (0..3).map(|j| values[j][0]).product();
            let p2: f64 = (0..3).map(|j| values[j][1]).product();
            assert!(
                (out - (p1 - p2)).abs() <= (0.5f64).powi(13),
                "err {}",
                (out - (p1 - p2)).abs()
            );
        }
    }

    #[test]
    fn induction_bound_at_every_round() {
        // per-lane chain error <= M^(2^(kappa-1)) 2^(kappa-2) / 2^(2U) after kappa factors
        let (k, l, u) = (3usize, 2usize, 5u32);
        let net = build_polynomial_net(&[1.0, 1.0], k, 1, 1.0, u, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let values: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..l).map(|_| rng.gen_range(0.0..=1.0)).collect())
                .collect();
            let x = net.layout_input(&values);
            let h = net.cnn.net.eval_hidden(&x).unwrap();
            for i in 0..l {
                let exact: f64 = (0..k).map(|j| values[j][i]).product();
                let got = h[net.g_lane(i)];
                let kappa = k as i32;
                let bound = 2f64.powi(kappa - 2) / 4f64.powi(u as i32);
                assert!((got - exact).abs() <= bound + 1e-12);
            }
        }
    }
}
