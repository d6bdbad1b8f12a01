//! The squaring network: maps y in [0,1]^L to [R_U(y); 0_{7L}; y] through
//! the sawtooth recursion, carried in the running state
//! [C_n; 0_{2L}; 2^n S_n; 0_{3L}; y] with S_n = T_n/4^n and C_n = sum S_i.

use super::builder::{GadgetAssembler, Keep};
use super::{depth, GadgetNet};
use crate::error::Result;
use crate::interval::Interval;

/// Where intermediate sawtooth blocks live, for the stage ledger.
#[derive(Debug, Clone)]
pub struct StageMark {
    /// stage n in 1..=U
    pub n: u32,
    /// network depth after this stage
    pub depth: usize,
    /// entry offset of the block holding 2^n S_n(y)
    pub g_offset: usize,
}

#[derive(Debug, Clone)]
pub struct RuNetwork {
    pub gadget: GadgetNet,
    /// entry offsets of R_U(y) and of the y copy in the final hidden state
    pub ru_offset: usize,
    pub y_offset: usize,
    pub stage_marks: Vec<StageMark>,
}

/// Append the squaring recursion to an assembler whose current hidden state
/// is zero except for a segment of width `lam` at entry `seg_off` holding
/// values in [0, 1]. Returns (entry offset of R_U(seg), of the seg copy,
/// stage marks).
pub fn append_ru(
    asm: &mut GadgetAssembler,
    seg_off: usize,
    lam: usize,
    u: u32,
) -> Result<(usize, usize, Vec<StageMark>)> {
    let blk = |b: usize| -> usize { seg_off + b * lam };
    // init: y -> [0_{3 lam}; y; 0_{3 lam}; y], state base at seg_off
    asm.apply_wide(
        &[(3 * lam, 1.0), (7 * lam, 1.0)],
        &[Keep::pass(blk(3), lam), Keep::pass(blk(7), lam)],
    )?;
    let mut base = 0usize; // template block index of C relative to seg_off
    let mut marks = Vec::with_capacity(u as usize);
    for n in 0..u {
        let t = |b: usize| -> usize { seg_off + (base + b) * lam };
        let thr = -(0.5f64).powi(n as i32);
        // split 2^n S_n into sigma(G), sigma(2G - 2^-n), sigma(G - 2^-n)
        asm.apply_wide(
            &[(0, 1.0), (lam, 2.0), (2 * lam, 1.0)],
            &[
                Keep::pass(t(0), lam),
                Keep::pass(t(3), lam),
                Keep::thresh(t(4), lam, thr),
                Keep::thresh(t(5), lam, thr),
                Keep::pass(t(7), lam),
            ],
        )?;
        // combine into 2^(n+1) S_(n+1) = A - B + C
        asm.apply_wide(
            &[(0, 1.0), (lam, -1.0), (2 * lam, 1.0)],
            &[
                Keep::pass(t(2), lam),
                Keep::pass(t(5), lam),
                Keep::pass(t(9), lam),
            ],
        )?;
        base += 2;
        let t = |b: usize| -> usize { seg_off + (base + b) * lam };
        // accumulate C_(n+1) = C_n + 2^-(n+1) * (2^(n+1) S_(n+1))
        asm.apply_wide(
            &[(0, (0.5f64).powi(n as i32 + 1)), (3 * lam, 1.0)],
            &[
                Keep::pass(t(3), lam),
                Keep::pass(t(6), lam),
                Keep::pass(t(10), lam),
            ],
        )?;
        base += 3;
        marks.push(StageMark {
            n: n + 1,
            depth: asm.depth(),
            g_offset: seg_off + (base + 3) * lam,
        });
    }
    // final: R_U(y) = y - C_U, y preserved 7 lam later
    let t = |b: usize| -> usize { seg_off + (base + b) * lam };
    asm.apply_wide(
        &[(0, 1.0), (7 * lam, -1.0), (8 * lam, 1.0)],
        &[Keep::pass(t(7), lam), Keep::pass(t(15), lam)],
    )?;
    Ok((t(7), t(15), marks))
}

/// Standalone squaring network for y in [0,1]^L with filter length s:
/// payload [R_U(y); 0_{7L}; y], depth within (7U+15)L/(s-1) + 3U + 2.
pub fn build_ru_network(u: u32, l: usize, s: usize) -> Result<RuNetwork> {
    assert!(u >= 1 && l >= 1);
    let mut asm = GadgetAssembler::new(vec![Interval::new(0.0, 1.0); l], s);
    let (ru_off, y_off, marks) = append_ru(&mut asm, 0, l, u)?;
    let bound = depth::ru(u, l, s);
    debug_assert!(
        (asm.depth() as f64) <= bound,
        "ru depth {} exceeds {bound}",
        asm.depth()
    );
    Ok(RuNetwork {
        gadget: GadgetNet {
            net: asm.net,
            payload_offset: ru_off,
            payload_len: 9 * l, // [R_U(y); 0_{7L}; y]
            depth_bound: bound,
            builder: "ru",
        },
        ru_offset: ru_off,
        y_offset: y_off,
        stage_marks: marks,
    })
}
