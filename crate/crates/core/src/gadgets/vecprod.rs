//! Approximate vector product: [y_1; ...; y_l] with blocks in [0,M]^k maps to
//! [xtilde(y_1, y_2); y_3; ...; y_l]. Pipeline: one wide layer forms
//! [(y_1+y_2)/2M; 0_{(l-1)k}; y_1/M; ...; y_l/M], the squaring network is run
//! on that whole segment, a combine layer assembles
//! 2M^2 [R_U(s) - R_U(u_1)/4 - R_U(u_2)/4] and rescales the pass-through
//! blocks, and zero elimination contracts the payload.

use super::builder::{GadgetAssembler, Keep};
use super::elim::append_elimzeros;
use super::ru::append_ru;
use super::{depth, GadgetNet};
use crate::error::Result;
use crate::interval::Interval;

#[derive(Debug, Clone)]
pub struct VecProdNet {
    pub gadget: GadgetNet,
    pub m_bound: f64,
    pub u: u32,
    pub k: usize,
    pub l: usize,
}

/// Append one vector-product round to an assembler whose hidden state is zero
/// outside the l contiguous blocks of width k starting at `off`, each bounded
/// by m_bound. Returns the entry offset of [xtilde(y1,y2); y3; ...; y_l]
/// ((l-1) blocks).
pub fn append_vectorprod(
    asm: &mut GadgetAssembler,
    off: usize,
    k: usize,
    l: usize,
    m_bound: f64,
    u: u32,
) -> Result<usize> {
    assert!(l >= 2 && k >= 1 && m_bound > 0.0);
    let m = m_bound;
    // stage 1: s-block at off + k, scaled copies at off + (l+1)k .. off + (2l+1)k
    asm.apply_wide(
        &[(0, 0.5 / m), (k, 0.5 / m), ((l + 1) * k, 1.0 / m)],
        &[
            Keep::pass(off + k, k),
            Keep::pass(off + (l + 1) * k, l * k),
        ],
    )?;
    // stage 2: squaring network over the whole segment [s; 0_{(l-1)k}; u_1..u_l]
    let lam = 2 * l * k;
    let (ru_off, seg_off, _) = append_ru(asm, off + k, lam, u)?;
    // k-block indices: R(s) at r0, R(u_t) at r0+l+t-1; s at s0, u_t at s0+l+t-1
    let rem = ru_off % k;
    let r0 = ru_off / k;
    let s0 = seg_off / k;
    debug_assert_eq!(seg_off % k, rem);
    debug_assert_eq!(s0 - r0, 16 * l);
    let entry = |block: usize| -> usize { rem + block * k };

    // stage 3: combine. Block j0 collects 2M^2 R(s) - (M^2/2)(R(u1) + R(u2));
    // for l > 2 a long tap simultaneously rescales u_3..u_l back to y_3..y_l,
    // landing them one elimination-ready gap after j0.
    let j0 = r0 + l + 2;
    let mut taps = vec![
        (k, -m * m / 2.0),
        (2 * k, -m * m / 2.0),
        ((l + 2) * k, 2.0 * m * m),
    ];
    let mut keeps = vec![Keep::pass(entry(j0), k)];
    if l == 2 {
        asm.apply_wide(&taps, &keeps)?;
        return Ok(entry(j0));
    }
    // gap between j0 and y_3 must be stages*(l-2) blocks for the elimination
    let lam_m0 = 2 * l + 2;
    let need_base = s0 + l + 2 + lam_m0 - j0 - 1;
    let stages = need_base.div_ceil(l - 2);
    let lam_m = lam_m0 + stages * (l - 2) - need_base;
    taps.push((lam_m * k, m));
    let y3 = s0 + l + 2 + lam_m;
    keeps.push(Keep::pass(entry(y3), (l - 2) * k));
    asm.apply_wide(&taps, &keeps)?;
    debug_assert_eq!(y3 - j0 - 1, stages * (l - 2));
    append_elimzeros(asm, entry(j0), stages, k, l - 1)
}

/// Standalone vector-product network with filter length s.
pub fn build_vectorprod(m_bound: f64, u: u32, k: usize, l: usize, s: usize) -> Result<VecProdNet> {
    let mut asm = GadgetAssembler::new(vec![Interval::new(0.0, m_bound); l * k], s);
    let off = append_vectorprod(&mut asm, 0, k, l, m_bound, u)?;
    let bound = depth::vecprod(u, l, k, s);
    debug_assert!(
        (asm.depth() as f64) <= bound,
        "vecprod depth {} exceeds {bound}",
        asm.depth()
    );
    Ok(VecProdNet {
        gadget: GadgetNet {
            net: asm.net,
            payload_offset: off,
            payload_len: (l - 1) * k,
            depth_bound: bound,
            builder: "vectorprod",
        },
        m_bound,
        u,
        k,
        l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::approx_product_eval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(m: f64, u: u32, k: usize, ys: &[Vec<f64>]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..k)
            .map(|j| approx_product_eval(m, u, ys[0][j], ys[1][j]))
            .collect();
        for y in &ys[2..] {
            out.extend(y.iter());
        }
        out
    }

    #[test]
    fn payload_matches_componentwise_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (m, u, k, l, s) in [
            (1.0f64, 4u32, 1usize, 2usize, 2usize),
            (1.0, 3, 2, 3, 2),
            (2.0, 2, 2, 4, 3),
            (1.0, 2, 3, 3, 3),
        ] {
            let net = build_vectorprod(m, u, k, l, s).unwrap();
            assert!(
                (net.gadget.net.depth() as f64) <= net.gadget.depth_bound,
                "depth {} > {} for l={l} k={k}",
                net.gadget.net.depth(),
                net.gadget.depth_bound
            );
            for _ in 0..30 {
                let ys: Vec<Vec<f64>> = (0..l)
                    .map(|_| (0..k).map(|_| rng.gen_range(0.0..=m)).collect())
                    .collect();
                let x: Vec<f64> = ys.concat();
                let p = net.gadget.payload(&x).unwrap();
                let want = oracle(m, u, k, &ys);
                for (j, (a, b)) in p.iter().zip(&want).enumerate() {
                    assert!(
                        (a - b).abs() <= 1e-9,
                        "lane {j}: {a} vs {b} (m={m} u={u} k={k} l={l} s={s})"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_first_blocks_pass_rest() {
        let net = build_vectorprod(1.0, 2, 2, 3, 2).unwrap();
        let x = vec![0.0, 0.0, 0.0, 0.0, 0.7, 0.4];
        let p = net.gadget.payload(&x).unwrap();
        assert!(p[0].abs() <= 1e-12 && p[1].abs() <= 1e-12);
        assert!((p[2] - 0.7).abs() <= 1e-10 && (p[3] - 0.4).abs() <= 1e-10);
    }

    #[test]
    fn example_bound_m1_u4() {
        let net = build_vectorprod(1.0, 4, 1, 2, 2).unwrap();
        let p = net.gadget.payload(&[0.3, 0.5]).unwrap();
        assert!((p[0] - 0.15).abs() <= (0.5f64).powi(8) + 1e-12);
    }
}
